#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qrc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;

// Entry point shared by the `qrc` executable and the tests. args[0] is the
// program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// One point of a sweep: dotted config keys and their values.
struct SweepPoint {
  std::vector<std::pair<std::string, std::string>> assignments;
};

// `g=0.1,1,10; seed=1,2` or `g=logspace(-2,3,13)`; a path to a file holding
// the same text (one assignment per line) is also accepted. Short keys g,
// ridge, diagonal_scale and seed map to their config sections. Returns the
// cartesian product in declaration order.
std::vector<SweepPoint> parse_sweep_spec(const std::string& spec);

}  // namespace qrc::cli
