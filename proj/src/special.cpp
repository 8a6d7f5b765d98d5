#include "isolab/special.hpp"

namespace isolab {

// The special-function kernels are header templates; compile the default
// double-precision instantiations once into the library.
template Cx<double> gamma_c<double>(const Cx<double>&);
template Cx<double> hyp2f1<double>(const Cx<double>&, const Cx<double>&,
                                   const Cx<double>&, const Cx<double>&);
template Cx<double> hyp_large_b<double>(const Cx<double>&, const Cx<double>&,
                                        const Cx<double>&, const Cx<double>&,
                                        int);

}  // namespace isolab
