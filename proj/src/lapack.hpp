#pragma once

// LAPACKE with std::complex as the complex type.
#include <complex>

#ifndef lapack_complex_float
#define lapack_complex_float std::complex<float>
#endif
#ifndef lapack_complex_double
#define lapack_complex_double std::complex<double>
#endif

#include <lapacke.h>
