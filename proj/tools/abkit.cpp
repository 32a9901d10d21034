#include <malloc.h>

#include <iostream>

#include "abkit/cli/commands.hpp"

int main(int argc, char** argv) {
  // Keep large training buffers on the heap between batches instead of
  // returning them to the OS on every free.
  mallopt(M_MMAP_THRESHOLD, 256 << 20);
  mallopt(M_TRIM_THRESHOLD, 512 << 20);
  return abkit::cli::run(argc, argv, std::cout, std::cerr);
}
