#include "magnifier/harness.hpp"

int main(int argc, char** argv) {
  return magnifier::harness::run_cli(argc, argv);
}
