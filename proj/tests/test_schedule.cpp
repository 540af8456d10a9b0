#include <doctest.h>

#include <cmath>

#include "ada/error.hpp"
#include "ada/rng.hpp"
#include "ada/schedule.hpp"

using namespace ada;

TEST_CASE("presets") {
  CHECK(schedule_preset("libri100") == MixtureSchedule{0.50, 0.20, 0.15, 0.20});
  CHECK(schedule_preset("libri960") == MixtureSchedule{0.30, 0.20, 0.21, 0.15});
  CHECK_THROWS_AS(schedule_preset("libri10"), Error);
  CHECK_NOTHROW(kLibri100.check());
  CHECK_NOTHROW(kLibri960.check());
  CHECK_THROWS_AS((MixtureSchedule{0.7, 0.2, 0.4, 0.2}.check()), Error);
  CHECK_THROWS_AS((MixtureSchedule{0.5, 1.2, 0.1, 0.2}.check()), Error);
  CHECK_THROWS_AS((MixtureSchedule{-0.1, 0.2, 0.1, 0.2}.check()), Error);
}

TEST_CASE("sentence mode thresholds") {
  CHECK(assign_mode(0.30, kLibri100) == SentenceMode::Aligned);
  CHECK(assign_mode(0.60, kLibri100) == SentenceMode::DictOnly);
  CHECK(assign_mode(0.90, kLibri100) == SentenceMode::Unchanged);
  CHECK(assign_mode(0.0, kLibri100) == SentenceMode::Aligned);
  CHECK(assign_mode(0.50, kLibri100) == SentenceMode::DictOnly);
  CHECK(assign_mode(0.65, kLibri100) == SentenceMode::Unchanged);
  CHECK(assign_mode(0.29, kLibri960) == SentenceMode::Aligned);
  CHECK(assign_mode(0.50, kLibri960) == SentenceMode::DictOnly);
  CHECK(assign_mode(0.52, kLibri960) == SentenceMode::Unchanged);
  CHECK(assign_mode(0.99, MixtureSchedule{}) == SentenceMode::Unchanged);
  static_assert(assign_mode(0.1, kLibri100) == SentenceMode::Aligned);
}

TEST_CASE("replacement counts") {
  CHECK(n_replacements(10, 0.20) == 2);
  CHECK(n_replacements(1, 0.20) == 1);
  CHECK(n_replacements(7, 0.20) == 1);
  CHECK(n_replacements(8, 0.20) == 2);  // 1.6 rounds up
  CHECK(n_replacements(5, 0.50) == 3);  // 2.5 rounds half up
  CHECK(n_replacements(10, 0.0) == 0);
  CHECK(n_replacements(0, 0.2) == 0);
  CHECK(n_replacements(4, 1.0) == 4);
}

TEST_CASE("replacement counts follow floor(f*n + 1/2) over a sweep") {
  // Oracle in integer arithmetic: f = p/100, so f*n + 1/2 = (p*n + 50)/100.
  for (std::size_t p = 1; p <= 100; ++p) {
    for (std::size_t n = 1; n <= 200; ++n) {
      const std::size_t expected = std::max<std::size_t>(1, (p * n + 50) / 100);
      REQUIRE(n_replacements(n, static_cast<double>(p) / 100.0) == std::min(expected, n));
    }
  }
}

TEST_CASE("empirical sentence fractions track the schedule") {
  for (const auto& s : {kLibri100, kLibri960}) {
    Rng rng(17);
    const std::size_t n = 10000;
    std::size_t aligned = 0, dict = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto m = assign_mode(rng.uniform01(), s);
      aligned += m == SentenceMode::Aligned;
      dict += m == SentenceMode::DictOnly;
    }
    auto within = [n](std::size_t count, double p) {
      const double sd = std::sqrt(p * (1 - p) / static_cast<double>(n));
      return std::abs(static_cast<double>(count) / static_cast<double>(n) - p) <= 5 * sd;
    };
    CHECK(within(aligned, s.p_aligned_sent));
    CHECK(within(dict, s.p_dict_sent));
    CHECK(within(aligned + dict, s.p_aligned_sent + s.p_dict_sent));
  }
}
