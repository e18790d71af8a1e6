// Draws one channel, runs every scheme on it and prints the rates next to
// the cut-set bound.

#include <cstdio>

#include "relaysim/capacity.hpp"
#include "relaysim/schemes.hpp"

int main() {
  using namespace relaysim;
  const NetworkDims dims{16, 2, 2};
  const PowerConfig powers = PowerConfig::equal(db_to_linear(10.0));
  const auto real = sample_realization(dims, 2024);

  const BeamformPlan plan = compute_plan(real, powers);
  const ThresholdSchedule threshold;
  const Activation icbs = icbs_activate(plan, threshold(dims.relays, powers), powers);

  std::printf("K=%d M=%d N=%d P=10 dB\n", dims.relays, dims.antennas, dims.relay_antennas);
  std::printf("cut-set      %.4f bits\n", cut_set_rate(real, powers.source));
  std::printf("CBS          %.4f bits (alpha %.3f)\n", rate_cbs(plan, powers).rate_bits, cbs_gain(plan, powers));
  std::printf("ICBS         %.4f bits (alpha %.3f, %d of %d relays on)\n",
              rate_icbs(real, plan, icbs, powers).rate_bits, icbs.alpha, icbs.count(), dims.relays);
  std::printf("BNOP         %.4f bits\n", bnop_matched_filter(real, powers).rate_bits);
  std::printf("C_u* (K)     %.4f bits\n", closed_form_cu_star(dims, powers.source));
  return 0;
}
