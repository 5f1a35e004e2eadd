#include <cmath>

#include "doctest.h"
#include "rda/attacker.hpp"
#include "rda/error.hpp"
#include "support.hpp"

using namespace rda;
using rda::test::random_image;

namespace {

Image smooth_image(int h, std::uint64_t seed) {
  Image noise = random_image(h, h, 1, seed);
  Image low = bandpass(noise, {0.0, 0.2});
  for (double& v : low.values()) v = 0.5 + 0.5 * (v - 0.5);
  return low;
}

// x + sum_n g_n * delta_n, built from decompose/idft2 only.
Image soft_mix(const Image& x, const Image& ref, const std::vector<double>& g, int bands) {
  std::vector<Spectrum> out;
  for (int c = 0; c < x.channels(); ++c) {
    Spectrum z = dft2(x.plane(c), x.height());
    Spectrum zr = dft2(ref.plane(c), x.height());
    BandStack a = decompose(z, bands), b = decompose(zr, bands);
    Spectrum mix(x.height());
    for (int n = 0; n < bands; ++n) {
      for (std::size_t k = 0; k < mix.count(); ++k) {
        const auto& an = a.bands[static_cast<std::size_t>(n)].values()[k];
        const auto& bn = b.bands[static_cast<std::size_t>(n)].values()[k];
        mix.values()[k] += an + g[static_cast<std::size_t>(n)] * (bn - an);
      }
    }
    out.push_back(std::move(mix));
  }
  return idft2(out);
}

GateSample gate_with(int bands, std::initializer_list<int> selected) {
  std::vector<int> hard(static_cast<std::size_t>(bands), 0);
  for (int n : selected) hard[static_cast<std::size_t>(n)] = 1;
  return GateSample::fixed(hard);
}

}  // namespace

TEST_CASE("identity gates") {
  Image x = random_image(32, 32, 3, 1);
  Image ref = random_image(32, 32, 3, 2);
  ReferencePool pool({ref});
  auto spectra = dft2(x);
  auto none = compose_attack(x, spectra, pool, 0, gate_with(16, {}), 16);
  CHECK(none.raw == x);
  CHECK(none.image == clamp01(x));
  std::vector<int> ones(16, 1);
  auto all = compose_attack(x, spectra, pool, 0, GateSample::fixed(ones), 16);
  CHECK(all.raw == ref);
  CHECK(max_abs_difference(all.raw, ref) <= 1e-9);
}

TEST_CASE("linearity identity at H = 32, N = 16") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Image x = random_image(32, 32, 1, 10 + seed);
    Image ref = random_image(32, 32, 1, 20 + seed);
    ReferencePool pool({ref});
    Rng rng(30 + seed);
    auto gate = gate_forward(GateParams::uniform(16), rng);
    auto sample = compose_attack(x, dft2(x), pool, 0, gate, 16);
    Image sum = x;
    for (int n = 0; n < 16; ++n) {
      if (!sample.gate.hard[static_cast<std::size_t>(n)]) continue;
      Image d = sample.delta(n);
      for (std::size_t k = 0; k < sum.size(); ++k) sum.values()[k] += d.values()[k];
    }
    CHECK(max_abs_difference(sample.raw, sum) <= 1e-9);
    // and the deltas agree with the independent band decomposition
    std::vector<double> g(sample.gate.hard.begin(), sample.gate.hard.end());
    CHECK(max_abs_difference(sample.raw, soft_mix(x, ref, g, 16)) <= 1e-9);
  }
}

TEST_CASE("mixed spectra stay conjugate-symmetric") {
  for (int h : {7, 28, 32}) {
    Image x = random_image(h, h, 1, 3);
    Image ref = random_image(h, h, 1, 4);
    auto z = dft2(x).front();
    auto zr = dft2(ref).front();
    auto layout = BandLayout::get(h, 16);
    Rng rng(5);
    auto gate = gate_forward(GateParams::uniform(16), rng);
    Spectrum mix(h);
    for (std::size_t k = 0; k < mix.count(); ++k) {
      mix.values()[k] = gate.hard[static_cast<std::size_t>(layout->assignments()[k])]
                            ? zr.values()[k]
                            : z.values()[k];
    }
    CHECK(imaginary_residue(mix) <= 1e-8);
  }
}

TEST_CASE("swapping only the outermost bands barely moves a smooth image") {
  Image x = smooth_image(32, 5);
  Image ref = smooth_image(32, 6);
  ReferencePool pool({ref});
  BandLayout layout(32, 20);
  // bands 19 and 20 cover d_norm in (0.9, 1]
  auto sample = compose_attack(x, dft2(x), pool, 0, gate_with(20, {18, 19}), 20);
  const double moved = max_abs_difference(sample.raw, x);
  const double swapped = max_abs_difference(ref, x);
  CHECK(moved <= 1e-10);
  CHECK(swapped > 0.05);
}

TEST_CASE("attack entry points") {
  Image x = random_image(16, 16, 1, 1);
  SUBCASE("empty pool") { CHECK_THROWS_AS(ReferencePool({}), StateError); }
  SUBCASE("shape mismatch") {
    ReferencePool pool({random_image(8, 8, 1, 2)});
    CHECK_THROWS_AS(compose_attack(x, dft2(x), pool, 0, gate_with(4, {}), 4), DimensionError);
  }
  SUBCASE("attacker counts calls and is seeded") {
    auto pool = std::make_shared<const ReferencePool>(
        std::vector<Image>{random_image(16, 16, 1, 3), random_image(16, 16, 1, 4)});
    FourierAttacker attacker(AttackerParams::make(8, 0.1, 1.0, {}), pool);
    Rng a(7), b(7);
    auto s1 = attacker.attack(x, a);
    auto s2 = attacker.attack(x, b);
    CHECK(attacker.calls() == 2);
    CHECK(s1.raw == s2.raw);
    CHECK(s1.gate.hard == s2.gate.hard);
    CHECK(s1.reference == s2.reference);
    auto s3 = attack(x, *pool, attacker.params(), b);
    CHECK(attacker.calls() == 2);
    CHECK(s3.image.same_shape(x));
  }
  SUBCASE("non-square images are squared first") {
    ReferencePool pool({random_image(6, 10, 1, 5)});
    CHECK(pool.image(0).height() == 10);
    CHECK(pool.image(0).width() == 10);
  }
}

TEST_CASE("rec_loss") {
  const RadialBand band{1.0 / 6.0, 0.5};
  Image x = random_image(28, 28, 1, 11);
  Image ref = random_image(28, 28, 1, 12);
  SUBCASE("identical inputs") { CHECK(rec_loss(x, x, band) == 0.0); }
  SUBCASE("differences outside the pass band are invisible") {
    // add a change living only above the pass band
    Image high = bandpass(random_image(28, 28, 1, 13), {0.6, 1.0});
    Image moved = x;
    for (std::size_t k = 0; k < moved.size(); ++k) moved.values()[k] += high.values()[k];
    CHECK(rec_loss(x, moved, band) <= 1e-8);
  }
  SUBCASE("full reference swap") {
    const double value = rec_loss(x, ref, band);
    Image a = bandpass(x, band), b = bandpass(ref, band);
    double direct = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) direct += std::abs(a.values()[k] - b.values()[k]);
    direct /= static_cast<double>(a.size());
    CHECK(value > 0.0);
    CHECK(value == doctest::Approx(direct).epsilon(1e-12));
  }
  SUBCASE("sample form uses the unclamped perturbation") {
    auto pool = std::make_shared<const ReferencePool>(std::vector<Image>{ref});
    FourierAttacker attacker(AttackerParams::make(16, 0.1, 1.0, band), pool);
    Rng rng(3);
    auto sample = attacker.attack(x, rng);
    REQUIRE(sample.has_shift());
    CHECK(rec_loss(sample) == doctest::Approx(rec_loss(x, sample.raw, band)).epsilon(1e-9));
    Image expected = bandpass(sample.raw, band);
    Image passed = bandpass(x, band);
    for (std::size_t k = 0; k < expected.size(); ++k) {
      CHECK(std::abs(sample.shift.values()[k] - (expected.values()[k] - passed.values()[k])) <=
            1e-10);
    }
  }
  SUBCASE("shape mismatch") {
    CHECK_THROWS_AS(rec_loss(x, random_image(16, 16, 1, 1), band), DimensionError);
  }
}

TEST_CASE("attack objective arithmetic") {
  CHECK(attack_objective(1.0, 0.0, 0.0) == 1.0);
  CHECK(attack_objective(1.0, 10.0, 0.2) == doctest::Approx(-9.2));
  CHECK(attack_objective(0.37, 0.0, 0.0) == 0.37);
  CHECK_THROWS_AS(attack_objective(NAN, 0.0, 0.0), NumericError);
  CHECK_THROWS_AS(attack_objective(1.0, INFINITY, 0.0), NumericError);
}

TEST_CASE("attack_backward") {
  const int h = 28, bands = 16;
  Image x = smooth_image(h, 21);
  Image ref = smooth_image(h, 22);
  ReferencePool pool({ref});
  auto mask = std::make_shared<const std::vector<char>>(band_mask(h, {1.0 / 6.0, 0.5}));
  auto sample = compose_attack(x, dft2(x), pool, 0, gate_with(bands, {2, 4}), bands, mask);
  Image target = random_image(h, h, 1, 23);

  SUBCASE("zero gradient") {
    for (double g : attack_backward(sample, Image(h, h, 1))) CHECK(g == 0.0);
  }
  SUBCASE("scaling") {
    Image grad = random_image(h, h, 1, 24);
    Image scaled = grad;
    for (double& v : scaled.values()) v *= -2.5;
    auto a = attack_backward(sample, grad);
    auto b = attack_backward(sample, scaled);
    for (std::size_t n = 0; n < a.size(); ++n) CHECK(b[n] == doctest::Approx(-2.5 * a[n]));
  }
  SUBCASE("missing deltas") {
    AdversarialSample empty;
    empty.raw = x;
    CHECK_THROWS_AS(attack_backward(empty, x), StateError);
  }
  SUBCASE("squared error matches central differences on the soft path") {
    // smooth inputs keep every pixel inside [0, 1], so the clamp is inactive
    for (double v : sample.raw.values()) REQUIRE((v > 0.0 && v < 1.0));
    Image grad = sample.raw;
    for (std::size_t k = 0; k < grad.size(); ++k) grad.values()[k] -= target.values()[k];
    auto analytic = attack_backward(sample, grad);
    std::vector<double> g(sample.gate.hard.begin(), sample.gate.hard.end());
    auto loss = [&](const std::vector<double>& gates) {
      Image mixed = soft_mix(x, ref, gates, bands);
      double l = 0.0;
      for (std::size_t k = 0; k < mixed.size(); ++k) {
        const double d = mixed.values()[k] - target.values()[k];
        l += 0.5 * d * d;
      }
      return l;
    };
    const double eps = 1e-5;
    for (int n = 0; n < bands; ++n) {
      auto plus = g, minus = g;
      plus[static_cast<std::size_t>(n)] += eps;
      minus[static_cast<std::size_t>(n)] -= eps;
      const double fd = (loss(plus) - loss(minus)) / (2.0 * eps);
      // central differences carry rounding noise of order ulp(loss) / eps
      const double noise = 1e-13 * std::abs(loss(g)) / eps;
      CHECK(std::abs(analytic[static_cast<std::size_t>(n)] - fd) <= 1e-4 * std::abs(fd) + noise);
    }
  }
  SUBCASE("reconstruction term matches central differences") {
    const double weight = 0.7;
    Image grad = sample.raw;
    for (std::size_t k = 0; k < grad.size(); ++k) grad.values()[k] -= target.values()[k];
    auto analytic = attack_backward(sample, grad, weight);
    std::vector<double> g(sample.gate.hard.begin(), sample.gate.hard.end());
    const RadialBand band{1.0 / 6.0, 0.5};
    auto objective = [&](const std::vector<double>& gates) {
      Image mixed = soft_mix(x, ref, gates, bands);
      double l = 0.0;
      for (std::size_t k = 0; k < mixed.size(); ++k) {
        const double d = mixed.values()[k] - target.values()[k];
        l += 0.5 * d * d;
      }
      return l - weight * rec_loss(x, mixed, band);
    };
    const double eps = 1e-6;
    for (int n = 0; n < bands; ++n) {
      auto plus = g, minus = g;
      plus[static_cast<std::size_t>(n)] += eps;
      minus[static_cast<std::size_t>(n)] -= eps;
      const double fd = (objective(plus) - objective(minus)) / (2.0 * eps);
      const double noise = 1e-13 * std::abs(objective(g)) / eps;
      CHECK(std::abs(analytic[static_cast<std::size_t>(n)] - fd) <= 1e-4 * std::abs(fd) + noise);
    }
  }
  SUBCASE("clamped pixels pass no gradient") {
    Image bright(h, h, 1, 0.98);
    Image mixed_ref = random_image(h, h, 1, 25);
    ReferencePool p2({mixed_ref});
    auto s = compose_attack(bright, dft2(bright), p2, 0, gate_with(bands, {0, 1, 2}), bands);
    Image grad(h, h, 1, 1.0);
    Image masked = grad;
    for (std::size_t k = 0; k < masked.size(); ++k) {
      const double v = s.raw.values()[k];
      if (v < 0.0 || v > 1.0) masked.values()[k] = 0.0;
    }
    auto a = attack_backward(s, grad);
    for (int n = 0; n < bands; ++n) {
      Image d = s.delta(n);
      double inner = 0.0;
      for (std::size_t k = 0; k < d.size(); ++k) inner += masked.values()[k] * d.values()[k];
      CHECK(a[static_cast<std::size_t>(n)] == doctest::Approx(inner).epsilon(1e-9).scale(1.0));
    }
  }
}
