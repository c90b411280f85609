#ifndef MMALIGN_OPS_H_
#define MMALIGN_OPS_H_

#include <vector>

#include "mmalign/autodiff.h"

// Differentiable kernels. Every op records itself on the tape of its inputs.
// Elementwise binary ops broadcast numpy-style (a dimension of 1 stretches).
// Ops named *LastAxis, Softmax, LayerNorm and L2Normalize act on rows of the
// last axis.
namespace mmalign::ops {

Var MatMul(Var a, Var b);  // [n,k] x [k,m] -> [n,m]
Var Transpose(Var a);      // rank 2

Var Add(Var a, Var b);
Var Sub(Var a, Var b);
Var Mul(Var a, Var b);
Var Scale(Var a, Scalar s);

Var Exp(Var a);
Var Log(Var a);  // errors on any non-positive entry
Var Relu(Var a);
Var LeakyRelu(Var a, Scalar slope);
Var Elu(Var a);
// max(a, lo); the gradient is zero where the floor is active.
Var ClampMin(Var a, Scalar lo);

Var Concat(const std::vector<Var>& parts);  // last axis
Var Slice(Var a, int begin, int end);       // last axis, [begin, end)
Var GatherRows(Var a, const std::vector<int>& rows);  // rank 2

Var Softmax(Var a);
Var LogSoftmax(Var a);
Var LayerNorm(Var x, Var gain, Var bias, Scalar eps = 1e-5);

// Rows with zero norm map to zero rows; their count is written to
// `zero_rows` when given.
Var L2Normalize(Var a, int* zero_rows = nullptr);

Var Sum(Var a);   // all entries -> rank 0
Var Mean(Var a);  // all entries -> rank 0
Var SumLastAxis(Var a);  // [..., n] -> [..., 1]

}  // namespace mmalign::ops

#endif  // MMALIGN_OPS_H_
