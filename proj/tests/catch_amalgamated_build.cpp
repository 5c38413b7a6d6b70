// Single translation unit for the amalgamated Catch2 implementation; keeps
// the test sources themselves fast to rebuild.
#include <catch2/catch_amalgamated.cpp>
