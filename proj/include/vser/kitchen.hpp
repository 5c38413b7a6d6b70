#pragma once

// Grid-world cooking engine; environment builders in envs.hpp sit on top.
// (Populated alongside the grid environments.)

namespace vser {}
