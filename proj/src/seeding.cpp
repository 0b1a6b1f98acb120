#include "dpolymer/seeding.hpp"

namespace dpolymer {

static_assert(splitmix64(0) == 0xE220A8397B1DCDAFULL,
              "SplitMix64 reference value");

}  // namespace dpolymer
