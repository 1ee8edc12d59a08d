#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "psg/psg.h"

namespace {

std::string take(char* s) {
  std::string out = s ? s : "";
  psg_string_free(s);
  return out;
}

}  // namespace

TEST(CApi, VersionAndStatusNames) {
  EXPECT_STREQ(psg_version(), "0.3.0");
  EXPECT_STREQ(psg_status_name(PSG_ERR_DIVISIBILITY), "divisibility");
}

TEST(CApi, CouplingAndEnergy) {
  std::vector<double> ones(16, 1.0);
  psg_coupling* g = nullptr;
  ASSERT_EQ(psg_coupling_from_values(4, ones.data(), &g), PSG_OK);
  EXPECT_EQ(psg_coupling_size(g), 4);
  const int colors[4] = {1, 1, 2, 2};
  psg_config* s = nullptr;
  ASSERT_EQ(psg_config_create(2, colors, 4, &s), PSG_OK);
  double h = 0;
  ASSERT_EQ(psg_hamiltonian_value(s, g, PSG_RAW, &h), PSG_OK);
  EXPECT_DOUBLE_EQ(h, 4.0);
  double d = 0;
  ASSERT_EQ(psg_delta_energy(s, g, 3, 1, &d), PSG_OK);
  EXPECT_NEAR(d, 1.0, 1e-12);
  int counts[4];
  ASSERT_EQ(psg_overlap_counts(s, s, counts, 4), PSG_OK);
  EXPECT_EQ(counts[0], 2);
  EXPECT_EQ(counts[1], 0);
  EXPECT_EQ(psg_overlap_counts(s, s, counts, 3), PSG_ERR_DIMENSION_MISMATCH);
  const int bad[4] = {1, 3, 1, 1};
  psg_config* t = nullptr;
  EXPECT_NE(psg_config_create(2, bad, 4, &t), PSG_OK);
  EXPECT_EQ(t, nullptr);
  EXPECT_GT(std::strlen(psg_last_error()), 0u);
  psg_config_free(s);
  psg_coupling_free(g);
}

TEST(CApi, ExactAndRate) {
  double r = 0;
  ASSERT_EQ(psg_second_moment_ratio(6, 0.0, 3, &r), PSG_OK);
  EXPECT_DOUBLE_EQ(r, 1.0);
  EXPECT_EQ(psg_second_moment_ratio(5, 1.0, 3, &r), PSG_ERR_DIVISIBILITY);
  const int perm[4] = {2, 0, 0, 2};
  ASSERT_EQ(psg_overlap_law(4, 2, perm, &r), PSG_OK);
  EXPECT_NEAR(r, 1.0 / 6, 1e-14);
  double v = 0;
  psg_branch branch;
  ASSERT_EQ(psg_beta_kappa(4, &v, &branch), PSG_OK);
  EXPECT_EQ(branch, PSG_BRANCH_TIE);
  EXPECT_EQ(psg_min_breaking_kappa(), 56);
  double lo = 0, hi = 0;
  int breaks = 0;
  ASSERT_EQ(psg_zero_temp_bounds(56, &hi, &lo, &breaks), PSG_OK);
  EXPECT_EQ(breaks, 1);
  double arg[9];
  ASSERT_EQ(psg_exponent_gap(3, 0.0, 0.02, &v, arg), PSG_OK);
  EXPECT_GT(v, 0.0);
  EXPECT_EQ(psg_exponent_gap(3, 0.0, 0.5, &v, nullptr), PSG_ERR_INFEASIBLE);
  std::uint64_t shells = 0;
  ASSERT_EQ(psg_shell_count(4, 2, 1, &shells), PSG_OK);
  EXPECT_GT(shells, 0u);
}

TEST(CApi, LogPartitionMatchesSector) {
  psg_coupling* g = nullptr;
  ASSERT_EQ(psg_coupling_gaussian(6, psg_child_seed(1, 0), &g), PSG_OK);
  double z = 0;
  ASSERT_EQ(psg_log_partition(g, 0.0, 3, "balanced", PSG_CENTERED, &z), PSG_OK);
  EXPECT_NEAR(z, std::log(90.0), 1e-12);
  EXPECT_EQ(psg_log_partition(g, 0.0, 3, "weird", PSG_CENTERED, &z), PSG_ERR_INVALID_ARGUMENT);
  psg_coupling_free(g);
}

TEST(CApi, ExperimentRoundTrip) {
  psg_experiment* e = nullptr;
  ASSERT_EQ(psg_experiment_parse(R"({"command":"second-moment","n":[3]})", &e), PSG_OK);
  char* cmd = nullptr;
  ASSERT_EQ(psg_experiment_command(e, &cmd), PSG_OK);
  EXPECT_EQ(take(cmd), "second-moment");
  psg_table* t = nullptr;
  ASSERT_EQ(psg_experiment_run(e, 1, &t), PSG_OK);
  EXPECT_EQ(psg_table_rows(t), 1u);
  EXPECT_EQ(psg_table_columns(t), 5u);
  char* csv = nullptr;
  ASSERT_EQ(psg_table_to_csv(t, &csv), PSG_OK);
  const std::string text = take(csv);
  char* spec = nullptr;
  ASSERT_EQ(psg_spec_from_output(text.c_str(), &spec), PSG_OK);
  char* canonical = nullptr;
  ASSERT_EQ(psg_experiment_canonical(e, &canonical), PSG_OK);
  EXPECT_EQ(take(spec), take(canonical));
  psg_table_free(t);
  psg_experiment_free(e);

  psg_experiment* bad = nullptr;
  EXPECT_EQ(psg_experiment_parse(R"({"command":"second-moment","n":[4]})", &bad), PSG_ERR_DIVISIBILITY);
  EXPECT_EQ(bad, nullptr);
  int n = 0;
  for (const char* const* c = psg_experiment_commands(); *c; ++c) ++n;
  EXPECT_EQ(n, 12);
}
