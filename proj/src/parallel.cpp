#include "ldp/parallel.hpp"

namespace ldp {

int hardware_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace ldp
