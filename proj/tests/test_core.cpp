#include <doctest.h>

#include <cmath>
#include <set>

#include "dcm/core.hpp"
#include "dcm/errors.hpp"
#include "dcm/rng.hpp"

using namespace dcm;

TEST_CASE("cluster key is insensitive to attribute insertion order") {
  TreatmentVector a;
  a["tone"] = "casual";
  a["value_prop"] = "convenience";
  TreatmentVector b;
  b["value_prop"] = "convenience";
  b["tone"] = "casual";
  CHECK(derive_cluster_key(a) == derive_cluster_key(b));
  CHECK(derive_cluster_key(a) == "tone=casual|value_prop=convenience");
}

TEST_CASE("cluster keys differ for distinct labels") {
  CHECK(derive_cluster_key({{"tone", "casual"}}) != derive_cluster_key({{"tone", "business"}}));
}

TEST_CASE("empty treatment vector is rejected") {
  CHECK_THROWS_AS(derive_cluster_key({}), EmptyTreatment);
}

TEST_CASE("separator characters cannot forge a collision") {
  // A single label embedding '|' and '=' must not alias a two-attribute key.
  const TreatmentVector tricky = {{"a", "b|c=d"}};
  const TreatmentVector plain = {{"a", "b"}, {"c", "d"}};
  CHECK(derive_cluster_key(tricky) != derive_cluster_key(plain));
}

TEST_CASE("key equality is exactly attribute-set equality") {
  Rng rng(7);
  const std::vector<std::string> pieces = {"a", "b", "a|b", "a=b", "%", "x"};
  for (int trial = 0; trial < 2000; ++trial) {
    auto draw = [&] {
      TreatmentVector v;
      const int n = 1 + int(rng.bounded(3));
      for (int i = 0; i < n; ++i)
        v[pieces[rng.bounded(pieces.size())]] = pieces[rng.bounded(pieces.size())];
      return v;
    };
    const TreatmentVector x = draw();
    const TreatmentVector y = draw();
    CHECK((derive_cluster_key(x) == derive_cluster_key(y)) == (x == y));
  }
}

TEST_CASE("derive_cluster_key is pure") {
  const TreatmentVector v = {{"channel", "push"}, {"timing", "evening"}};
  CHECK(derive_cluster_key(v) == derive_cluster_key(v));
}

TEST_CASE("rng streams reproduce and differ across keys") {
  Rng a = derive_rng(42, "msg-1");
  Rng b = derive_rng(42, "msg-1");
  Rng c = derive_rng(42, "msg-2");
  CHECK(a.next() == b.next());
  CHECK(a.next() != c.next());
}

TEST_CASE("bounded draws stay in range and hit every value") {
  Rng rng(3);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    const std::uint64_t v = rng.bounded(7);
    CHECK(v < 7);
    seen.insert(v);
  }
  CHECK(seen.size() == 7);
}

TEST_CASE("distribution sanity under a frozen seed") {
  Rng rng(11);
  double exp_sum = 0, norm_sum = 0, norm_sq = 0;
  int pois_sum = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    exp_sum += rng.exponential(2.0);
    const double z = rng.normal(1.0, 0.5);
    norm_sum += z;
    norm_sq += z * z;
    pois_sum += rng.poisson(2.5);
  }
  CHECK(exp_sum / n == doctest::Approx(0.5).epsilon(0.05));
  CHECK(norm_sum / n == doctest::Approx(1.0).epsilon(0.02));
  const double var = norm_sq / n - (norm_sum / n) * (norm_sum / n);
  CHECK(std::sqrt(var) == doctest::Approx(0.5).epsilon(0.05));
  CHECK(double(pois_sum) / n == doctest::Approx(2.5).epsilon(0.05));
}
