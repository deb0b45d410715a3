// Copyright 2026 The JointSLT Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "slt/numerics/ops.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace slt {

std::string ShapeToString(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << ", ";
    out << shape[i];
  }
  out << ']';
  return out.str();
}

std::size_t ShapeSize(const Shape& shape) {
  std::size_t n = 1;
  for (int d : shape) n *= static_cast<std::size_t>(std::max(d, 0));
  return n;
}

namespace ops {
namespace {

template <typename T>
using NodePtr = std::shared_ptr<TensorNode<T>>;

// Returns the tape to record on, or null when no recording is needed.
template <typename T>
Tape<T>* RecordingTape(std::initializer_list<const Tensor<T>*> inputs) {
  Tape<T>* tape = ActiveTape<T>();
  if (tape == nullptr) return nullptr;
  for (const Tensor<T>* t : inputs) {
    if (t->defined() && t->requires_grad()) return tape;
  }
  return nullptr;
}

template <typename T>
std::vector<T>& GradOf(const NodePtr<T>& node) {
  if (node->grad.empty()) node->grad.assign(node->data.size(), T(0));
  return node->grad;
}

template <typename T>
Tensor<T> MakeOutput(Shape shape, std::vector<T> data, const char* op,
                     Tape<T>* tape) {
  CheckFinite<T>(data, op);
  return Tensor<T>(std::move(shape), std::move(data), tape != nullptr);
}

void RequireSameShape(const Shape& a, const Shape& b, const char* op) {
  if (a != b) {
    throw ShapeError(std::string(op) + ": " + ShapeToString(a) + " vs " +
                     ShapeToString(b));
  }
}

// c[M,N] += a[M,K] * b[K,N]
template <typename T>
void GemmNN(const T* a, const T* b, T* c, int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    T* crow = c + static_cast<std::size_t>(i) * n;
    const T* arow = a + static_cast<std::size_t>(i) * k;
    for (int p = 0; p < k; ++p) {
      const T av = arow[p];
      if (av == T(0)) continue;
      const T* brow = b + static_cast<std::size_t>(p) * n;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// c[M,K] += a[M,N] * b[K,N]^T
template <typename T>
void GemmNT(const T* a, const T* b, T* c, int m, int n, int k) {
  for (int i = 0; i < m; ++i) {
    const T* arow = a + static_cast<std::size_t>(i) * n;
    T* crow = c + static_cast<std::size_t>(i) * k;
    for (int p = 0; p < k; ++p) {
      const T* brow = b + static_cast<std::size_t>(p) * n;
      T acc = 0;
      for (int j = 0; j < n; ++j) acc += arow[j] * brow[j];
      crow[p] += acc;
    }
  }
}

// c[K,N] += a[M,K]^T * b[M,N]
template <typename T>
void GemmTN(const T* a, const T* b, T* c, int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    const T* arow = a + static_cast<std::size_t>(i) * k;
    const T* brow = b + static_cast<std::size_t>(i) * n;
    for (int p = 0; p < k; ++p) {
      const T av = arow[p];
      if (av == T(0)) continue;
      T* crow = c + static_cast<std::size_t>(p) * n;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

}  // namespace

template <typename T>
void CheckFinite(std::span<const T> values, const char* what) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      std::ostringstream msg;
      msg << what << " produced " << values[i] << " at flat index " << i;
      throw NumericError(msg.str());
    }
  }
}

AttentionMask AttentionMask::Open(int batch, int queries, int keys) {
  AttentionMask mask;
  mask.batch = batch;
  mask.queries = queries;
  mask.keys = keys;
  mask.allowed.assign(static_cast<std::size_t>(batch) * queries * keys, 1);
  return mask;
}

template <typename T>
Tensor<T> Add(const Tensor<T>& a, const Tensor<T>& b) {
  RequireSameShape(a.shape(), b.shape(), "Add");
  Tape<T>* tape = RecordingTape<T>({&a, &b});
  std::vector<T> out(a.size());
  auto ad = a.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = ad[i] + bd[i];
  Tensor<T> result = MakeOutput(a.shape(), std::move(out), "Add", tape);
  if (tape) {
    tape->Record("Add", result.node(),
                 [an = a.node(), bn = b.node(), on = result.node()] {
                   for (const auto& in : {an, bn}) {
                     if (!in->requires_grad) continue;
                     auto& g = GradOf(in);
                     for (std::size_t i = 0; i < g.size(); ++i) g[i] += on->grad[i];
                   }
                 });
  }
  return result;
}

template <typename T>
Tensor<T> Sub(const Tensor<T>& a, const Tensor<T>& b) {
  RequireSameShape(a.shape(), b.shape(), "Sub");
  Tape<T>* tape = RecordingTape<T>({&a, &b});
  std::vector<T> out(a.size());
  auto ad = a.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = ad[i] - bd[i];
  Tensor<T> result = MakeOutput(a.shape(), std::move(out), "Sub", tape);
  if (tape) {
    tape->Record("Sub", result.node(),
                 [an = a.node(), bn = b.node(), on = result.node()] {
                   if (an->requires_grad) {
                     auto& g = GradOf(an);
                     for (std::size_t i = 0; i < g.size(); ++i) g[i] += on->grad[i];
                   }
                   if (bn->requires_grad) {
                     auto& g = GradOf(bn);
                     for (std::size_t i = 0; i < g.size(); ++i) g[i] -= on->grad[i];
                   }
                 });
  }
  return result;
}

template <typename T>
Tensor<T> Mul(const Tensor<T>& a, const Tensor<T>& b) {
  RequireSameShape(a.shape(), b.shape(), "Mul");
  Tape<T>* tape = RecordingTape<T>({&a, &b});
  std::vector<T> out(a.size());
  auto ad = a.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = ad[i] * bd[i];
  Tensor<T> result = MakeOutput(a.shape(), std::move(out), "Mul", tape);
  if (tape) {
    tape->Record("Mul", result.node(),
                 [an = a.node(), bn = b.node(), on = result.node()] {
                   if (an->requires_grad) {
                     auto& g = GradOf(an);
                     for (std::size_t i = 0; i < g.size(); ++i)
                       g[i] += on->grad[i] * bn->data[i];
                   }
                   if (bn->requires_grad) {
                     auto& g = GradOf(bn);
                     for (std::size_t i = 0; i < g.size(); ++i)
                       g[i] += on->grad[i] * an->data[i];
                   }
                 });
  }
  return result;
}

template <typename T>
Tensor<T> Scale(const Tensor<T>& a, T factor) {
  Tape<T>* tape = RecordingTape<T>({&a});
  std::vector<T> out(a.data().begin(), a.data().end());
  for (T& v : out) v *= factor;
  Tensor<T> result = MakeOutput(a.shape(), std::move(out), "Scale", tape);
  if (tape) {
    tape->Record("Scale", result.node(),
                 [an = a.node(), on = result.node(), factor] {
                   auto& g = GradOf(an);
                   for (std::size_t i = 0; i < g.size(); ++i)
                     g[i] += on->grad[i] * factor;
                 });
  }
  return result;
}

template <typename T>
Tensor<T> Relu(const Tensor<T>& a) {
  Tape<T>* tape = RecordingTape<T>({&a});
  std::vector<T> out(a.data().begin(), a.data().end());
  for (T& v : out) v = v > T(0) ? v : T(0);
  Tensor<T> result = MakeOutput(a.shape(), std::move(out), "Relu", tape);
  if (tape) {
    tape->Record("Relu", result.node(), [an = a.node(), on = result.node()] {
      auto& g = GradOf(an);
      for (std::size_t i = 0; i < g.size(); ++i)
        if (an->data[i] > T(0)) g[i] += on->grad[i];
    });
  }
  return result;
}

template <typename T>
Tensor<T> Sum(const Tensor<T>& a) {
  Tape<T>* tape = RecordingTape<T>({&a});
  T total = std::accumulate(a.data().begin(), a.data().end(), T(0));
  Tensor<T> result = MakeOutput<T>({1}, {total}, "Sum", tape);
  if (tape) {
    tape->Record("Sum", result.node(), [an = a.node(), on = result.node()] {
      auto& g = GradOf(an);
      for (T& v : g) v += on->grad[0];
    });
  }
  return result;
}

template <typename T>
Tensor<T> Mean(const Tensor<T>& a) {
  return Scale(Sum(a), T(1) / static_cast<T>(a.size()));
}

template <typename T>
Tensor<T> Reshape(const Tensor<T>& a, Shape shape) {
  if (ShapeSize(shape) != a.size()) {
    throw ShapeError("Reshape " + ShapeToString(a.shape()) + " to " +
                     ShapeToString(shape));
  }
  Tape<T>* tape = RecordingTape<T>({&a});
  std::vector<T> out(a.data().begin(), a.data().end());
  Tensor<T> result(std::move(shape), std::move(out), tape != nullptr);
  if (tape) {
    tape->Record("Reshape", result.node(), [an = a.node(), on = result.node()] {
      auto& g = GradOf(an);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += on->grad[i];
    });
  }
  return result;
}

template <typename T>
Tensor<T> MatMul(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw ShapeError("MatMul " + ShapeToString(a.shape()) + " x " +
                     ShapeToString(b.shape()));
  }
  const int m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tape<T>* tape = RecordingTape<T>({&a, &b});
  std::vector<T> out(static_cast<std::size_t>(m) * n, T(0));
  GemmNN(a.data().data(), b.data().data(), out.data(), m, k, n);
  Tensor<T> result = MakeOutput<T>({m, n}, std::move(out), "MatMul", tape);
  if (tape) {
    tape->Record("MatMul", result.node(),
                 [an = a.node(), bn = b.node(), on = result.node(), m, k, n] {
                   if (an->requires_grad)
                     GemmNT(on->grad.data(), bn->data.data(), GradOf(an).data(), m, n, k);
                   if (bn->requires_grad)
                     GemmTN(an->data.data(), on->grad.data(), GradOf(bn).data(), m, k, n);
                 });
  }
  return result;
}

template <typename T>
Tensor<T> Linear(const Tensor<T>& x, const Tensor<T>& weight,
                 const Tensor<T>& bias) {
  if (weight.rank() != 2 || x.dim(-1) != weight.dim(0)) {
    throw ShapeError("Linear input " + ShapeToString(x.shape()) +
                     " with weight " + ShapeToString(weight.shape()));
  }
  const int k = weight.dim(0), n = weight.dim(1);
  if (bias.defined() && (bias.rank() != 1 || bias.dim(0) != n)) {
    throw ShapeError("Linear bias " + ShapeToString(bias.shape()));
  }
  const int m = static_cast<int>(x.size() / k);
  Tape<T>* tape = RecordingTape<T>({&x, &weight, &bias});
  std::vector<T> out(static_cast<std::size_t>(m) * n);
  if (bias.defined()) {
    auto bd = bias.data();
    for (int i = 0; i < m; ++i)
      std::copy(bd.begin(), bd.end(), out.begin() + static_cast<std::size_t>(i) * n);
  } else {
    std::fill(out.begin(), out.end(), T(0));
  }
  GemmNN(x.data().data(), weight.data().data(), out.data(), m, k, n);
  Shape shape = x.shape();
  shape.back() = n;
  Tensor<T> result = MakeOutput(std::move(shape), std::move(out), "Linear", tape);
  if (tape) {
    NodePtr<T> bn = bias.defined() ? bias.node() : nullptr;
    tape->Record("Linear", result.node(),
                 [xn = x.node(), wn = weight.node(), bn, on = result.node(), m,
                  k, n] {
                   if (xn->requires_grad)
                     GemmNT(on->grad.data(), wn->data.data(), GradOf(xn).data(), m, n, k);
                   if (wn->requires_grad)
                     GemmTN(xn->data.data(), on->grad.data(), GradOf(wn).data(), m, k, n);
                   if (bn && bn->requires_grad) {
                     auto& g = GradOf(bn);
                     for (int i = 0; i < m; ++i) {
                       const T* row = on->grad.data() + static_cast<std::size_t>(i) * n;
                       for (int j = 0; j < n; ++j) g[j] += row[j];
                     }
                   }
                 });
  }
  return result;
}

template <typename T>
Tensor<T> Softmax(const Tensor<T>& logits, int axis) {
  const int rank = logits.rank();
  if (axis < 0) axis += rank;
  if (axis < 0 || axis >= rank) {
    throw ShapeError("Softmax axis out of range for " +
                     ShapeToString(logits.shape()));
  }
  CheckFinite(logits.data(), "Softmax input");
  const Shape& shape = logits.shape();
  std::size_t outer = 1, inner = 1;
  for (int i = 0; i < axis; ++i) outer *= shape[i];
  for (int i = axis + 1; i < rank; ++i) inner *= shape[i];
  const std::size_t len = shape[axis];
  Tape<T>* tape = RecordingTape<T>({&logits});
  auto in = logits.data();
  std::vector<T> out(in.size());
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t r = 0; r < inner; ++r) {
      const std::size_t base = o * len * inner + r;
      T max_v = in[base];
      for (std::size_t i = 1; i < len; ++i) max_v = std::max(max_v, in[base + i * inner]);
      T total = 0;
      for (std::size_t i = 0; i < len; ++i) {
        T e = std::exp(in[base + i * inner] - max_v);
        out[base + i * inner] = e;
        total += e;
      }
      for (std::size_t i = 0; i < len; ++i) out[base + i * inner] /= total;
    }
  }
  Tensor<T> result = MakeOutput(shape, std::move(out), "Softmax", tape);
  if (tape) {
    tape->Record("Softmax", result.node(),
                 [ln = logits.node(), on = result.node(), outer, inner, len] {
                   auto& g = GradOf(ln);
                   const auto& y = on->data;
                   const auto& dy = on->grad;
                   for (std::size_t o = 0; o < outer; ++o) {
                     for (std::size_t r = 0; r < inner; ++r) {
                       const std::size_t base = o * len * inner + r;
                       T dot = 0;
                       for (std::size_t i = 0; i < len; ++i)
                         dot += dy[base + i * inner] * y[base + i * inner];
                       for (std::size_t i = 0; i < len; ++i) {
                         const std::size_t idx = base + i * inner;
                         g[idx] += y[idx] * (dy[idx] - dot);
                       }
                     }
                   }
                 });
  }
  return result;
}

template <typename T>
Tensor<T> LayerNorm(const Tensor<T>& x, const Tensor<T>& gain,
                    const Tensor<T>& bias, T epsilon) {
  const int width = x.dim(-1);
  if (width == 0) throw ShapeError("LayerNorm on zero-length rows");
  if (gain.rank() != 1 || gain.dim(0) != width || bias.rank() != 1 ||
      bias.dim(0) != width) {
    throw ShapeError("LayerNorm gain/bias " + ShapeToString(gain.shape()) +
                     "/" + ShapeToString(bias.shape()) + " for input " +
                     ShapeToString(x.shape()));
  }
  const std::size_t rows = x.size() / width;
  Tape<T>* tape = RecordingTape<T>({&x, &gain, &bias});
  auto xd = x.data();
  auto gd = gain.data();
  auto bd = bias.data();
  std::vector<T> out(x.size());
  std::vector<T> normalized(x.size());
  std::vector<T> inv_std(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const T* row = xd.data() + r * width;
    T mean = 0;
    for (int i = 0; i < width; ++i) mean += row[i];
    mean /= width;
    T var = 0;
    for (int i = 0; i < width; ++i) var += (row[i] - mean) * (row[i] - mean);
    var /= width;
    const T is = T(1) / std::sqrt(var + epsilon);
    inv_std[r] = is;
    for (int i = 0; i < width; ++i) {
      const T xhat = (row[i] - mean) * is;
      normalized[r * width + i] = xhat;
      out[r * width + i] = gd[i] * xhat + bd[i];
    }
  }
  Tensor<T> result = MakeOutput(x.shape(), std::move(out), "LayerNorm", tape);
  if (tape) {
    tape->Record(
        "LayerNorm", result.node(),
        [xn = x.node(), gn = gain.node(), bn = bias.node(), on = result.node(),
         normalized = std::move(normalized), inv_std = std::move(inv_std), rows,
         width] {
          const auto& dy = on->grad;
          if (gn->requires_grad || bn->requires_grad) {
            auto& gg = GradOf(gn);
            auto& gb = GradOf(bn);
            for (std::size_t r = 0; r < rows; ++r) {
              for (int i = 0; i < width; ++i) {
                gg[i] += dy[r * width + i] * normalized[r * width + i];
                gb[i] += dy[r * width + i];
              }
            }
          }
          if (!xn->requires_grad) return;
          auto& gx = GradOf(xn);
          std::vector<T> dxhat(width);
          for (std::size_t r = 0; r < rows; ++r) {
            T mean_d = 0, mean_dx = 0;
            for (int i = 0; i < width; ++i) {
              dxhat[i] = dy[r * width + i] * gn->data[i];
              mean_d += dxhat[i];
              mean_dx += dxhat[i] * normalized[r * width + i];
            }
            mean_d /= width;
            mean_dx /= width;
            for (int i = 0; i < width; ++i) {
              gx[r * width + i] +=
                  inv_std[r] * (dxhat[i] - mean_d - normalized[r * width + i] * mean_dx);
            }
          }
        });
  }
  return result;
}

template <typename T>
Tensor<T> ScaledDotAttention(const Tensor<T>& queries, const Tensor<T>& keys,
                             const Tensor<T>& values,
                             const AttentionMask* mask) {
  if (queries.rank() != 3 || keys.rank() != 3 || values.rank() != 3) {
    throw ShapeError("attention expects rank-3 Q, K, V");
  }
  const int batch = queries.dim(0), tq = queries.dim(1), dk = queries.dim(2);
  const int tk = keys.dim(1), dv = values.dim(2);
  if (keys.dim(0) != batch || values.dim(0) != batch || keys.dim(2) != dk ||
      values.dim(1) != tk) {
    throw ShapeError("attention Q " + ShapeToString(queries.shape()) + " K " +
                     ShapeToString(keys.shape()) + " V " +
                     ShapeToString(values.shape()));
  }
  int group = 1;
  if (mask) {
    if (mask->keys != tk || mask->batch <= 0 || batch % mask->batch != 0 ||
        (mask->queries != 1 && mask->queries != tq)) {
      throw ShapeError("attention mask [" + std::to_string(mask->batch) + ", " +
                       std::to_string(mask->queries) + ", " +
                       std::to_string(mask->keys) + "] not broadcastable to [" +
                       std::to_string(batch) + ", " + std::to_string(tq) + ", " +
                       std::to_string(tk) + "]");
    }
    group = batch / mask->batch;
  }
  Tape<T>* tape = RecordingTape<T>({&queries, &keys, &values});
  const T scale = T(1) / std::sqrt(static_cast<T>(dk));
  auto qd = queries.data();
  auto kd = keys.data();
  auto vd = values.data();
  std::vector<T> probs(static_cast<std::size_t>(batch) * tq * tk, T(0));
  std::vector<T> out(static_cast<std::size_t>(batch) * tq * dv, T(0));
  std::vector<T> scores(tk);
  for (int b = 0; b < batch; ++b) {
    const T* q = qd.data() + static_cast<std::size_t>(b) * tq * dk;
    const T* k = kd.data() + static_cast<std::size_t>(b) * tk * dk;
    const T* v = vd.data() + static_cast<std::size_t>(b) * tk * dv;
    T* p = probs.data() + static_cast<std::size_t>(b) * tq * tk;
    for (int i = 0; i < tq; ++i) {
      T max_v = -std::numeric_limits<T>::infinity();
      bool any = false;
      for (int j = 0; j < tk; ++j) {
        if (mask && !mask->at(b / group, mask->queries == 1 ? 0 : i, j)) continue;
        T s = 0;
        for (int d = 0; d < dk; ++d) s += q[i * dk + d] * k[j * dk + d];
        s *= scale;
        scores[j] = s;
        max_v = any ? std::max(max_v, s) : s;
        any = true;
      }
      if (!any) continue;
      T total = 0;
      T* prow = p + static_cast<std::size_t>(i) * tk;
      for (int j = 0; j < tk; ++j) {
        if (mask && !mask->at(b / group, mask->queries == 1 ? 0 : i, j)) continue;
        prow[j] = std::exp(scores[j] - max_v);
        total += prow[j];
      }
      for (int j = 0; j < tk; ++j) prow[j] /= total;
    }
    GemmNN(p, v, out.data() + static_cast<std::size_t>(b) * tq * dv, tq, tk, dv);
  }
  Tensor<T> result =
      MakeOutput<T>({batch, tq, dv}, std::move(out), "ScaledDotAttention", tape);
  if (tape) {
    tape->Record(
        "ScaledDotAttention", result.node(),
        [qn = queries.node(), kn = keys.node(), vn = values.node(),
         on = result.node(), probs = std::move(probs), batch, tq, tk, dk, dv,
         scale] {
          std::vector<T> dp(static_cast<std::size_t>(tq) * tk);
          for (int b = 0; b < batch; ++b) {
            const T* p = probs.data() + static_cast<std::size_t>(b) * tq * tk;
            const T* dout = on->grad.data() + static_cast<std::size_t>(b) * tq * dv;
            const T* q = qn->data.data() + static_cast<std::size_t>(b) * tq * dk;
            const T* k = kn->data.data() + static_cast<std::size_t>(b) * tk * dk;
            const T* v = vn->data.data() + static_cast<std::size_t>(b) * tk * dv;
            if (vn->requires_grad) {
              GemmTN(p, dout, GradOf(vn).data() + static_cast<std::size_t>(b) * tk * dv,
                     tq, tk, dv);
            }
            if (!qn->requires_grad && !kn->requires_grad) continue;
            std::fill(dp.begin(), dp.end(), T(0));
            GemmNT(dout, v, dp.data(), tq, dv, tk);
            // dS = P * (dP - rowsum(dP * P)), folded with the 1/sqrt(dk) scale.
            for (int i = 0; i < tq; ++i) {
              T dot = 0;
              for (int j = 0; j < tk; ++j) dot += dp[i * tk + j] * p[i * tk + j];
              for (int j = 0; j < tk; ++j)
                dp[i * tk + j] = p[i * tk + j] * (dp[i * tk + j] - dot) * scale;
            }
            if (qn->requires_grad) {
              GemmNN(dp.data(), k, GradOf(qn).data() + static_cast<std::size_t>(b) * tq * dk,
                     tq, tk, dk);
            }
            if (kn->requires_grad) {
              GemmTN(dp.data(), q, GradOf(kn).data() + static_cast<std::size_t>(b) * tk * dk,
                     tq, tk, dk);
            }
          }
        });
  }
  return result;
}

template <typename T>
Tensor<T> SplitHeads(const Tensor<T>& x, int heads) {
  if (x.rank() != 3 || x.dim(2) % heads != 0) {
    throw ShapeError("SplitHeads " + ShapeToString(x.shape()) + " into " +
                     std::to_string(heads));
  }
  const int batch = x.dim(0), steps = x.dim(1), width = x.dim(2);
  const int d = width / heads;
  Tape<T>* tape = RecordingTape<T>({&x});
  auto xd = x.data();
  std::vector<T> out(x.size());
  for (int b = 0; b < batch; ++b)
    for (int h = 0; h < heads; ++h)
      for (int t = 0; t < steps; ++t)
        std::copy_n(xd.data() + (static_cast<std::size_t>(b) * steps + t) * width + h * d, d,
                    out.data() + ((static_cast<std::size_t>(b) * heads + h) * steps + t) * d);
  Tensor<T> result = MakeOutput<T>({batch * heads, steps, d}, std::move(out),
                                   "SplitHeads", tape);
  if (tape) {
    tape->Record("SplitHeads", result.node(),
                 [xn = x.node(), on = result.node(), batch, heads, steps, d, width] {
                   auto& g = GradOf(xn);
                   for (int b = 0; b < batch; ++b)
                     for (int h = 0; h < heads; ++h)
                       for (int t = 0; t < steps; ++t) {
                         const T* src = on->grad.data() +
                             ((static_cast<std::size_t>(b) * heads + h) * steps + t) * d;
                         T* dst = g.data() + (static_cast<std::size_t>(b) * steps + t) * width + h * d;
                         for (int i = 0; i < d; ++i) dst[i] += src[i];
                       }
                 });
  }
  return result;
}

template <typename T>
Tensor<T> MergeHeads(const Tensor<T>& x, int heads) {
  if (x.rank() != 3 || x.dim(0) % heads != 0) {
    throw ShapeError("MergeHeads " + ShapeToString(x.shape()) + " from " +
                     std::to_string(heads));
  }
  const int batch = x.dim(0) / heads, steps = x.dim(1), d = x.dim(2);
  const int width = d * heads;
  Tape<T>* tape = RecordingTape<T>({&x});
  auto xd = x.data();
  std::vector<T> out(x.size());
  for (int b = 0; b < batch; ++b)
    for (int h = 0; h < heads; ++h)
      for (int t = 0; t < steps; ++t)
        std::copy_n(xd.data() + ((static_cast<std::size_t>(b) * heads + h) * steps + t) * d, d,
                    out.data() + (static_cast<std::size_t>(b) * steps + t) * width + h * d);
  Tensor<T> result =
      MakeOutput<T>({batch, steps, width}, std::move(out), "MergeHeads", tape);
  if (tape) {
    tape->Record("MergeHeads", result.node(),
                 [xn = x.node(), on = result.node(), batch, heads, steps, d, width] {
                   auto& g = GradOf(xn);
                   for (int b = 0; b < batch; ++b)
                     for (int h = 0; h < heads; ++h)
                       for (int t = 0; t < steps; ++t) {
                         const T* src = on->grad.data() +
                             (static_cast<std::size_t>(b) * steps + t) * width + h * d;
                         T* dst = g.data() +
                             ((static_cast<std::size_t>(b) * heads + h) * steps + t) * d;
                         for (int i = 0; i < d; ++i) dst[i] += src[i];
                       }
                 });
  }
  return result;
}

template <typename T>
Tensor<T> Embedding(const Tensor<T>& table, std::span<const int> ids,
                    const Shape& ids_shape) {
  if (table.rank() != 2 || ShapeSize(ids_shape) != ids.size()) {
    throw ShapeError("Embedding table " + ShapeToString(table.shape()) +
                     " ids " + ShapeToString(ids_shape));
  }
  const int vocab = table.dim(0), width = table.dim(1);
  for (int id : ids) {
    if (id < 0 || id >= vocab) {
      throw ShapeError("Embedding id " + std::to_string(id) +
                       " outside vocabulary of " + std::to_string(vocab));
    }
  }
  Tape<T>* tape = RecordingTape<T>({&table});
  auto td = table.data();
  std::vector<T> out(ids.size() * width);
  for (std::size_t i = 0; i < ids.size(); ++i)
    std::copy_n(td.data() + static_cast<std::size_t>(ids[i]) * width, width,
                out.data() + i * width);
  Shape shape = ids_shape;
  shape.push_back(width);
  Tensor<T> result = MakeOutput(std::move(shape), std::move(out), "Embedding", tape);
  if (tape) {
    tape->Record("Embedding", result.node(),
                 [tn = table.node(), on = result.node(),
                  ids = std::vector<int>(ids.begin(), ids.end()), width] {
                   auto& g = GradOf(tn);
                   for (std::size_t i = 0; i < ids.size(); ++i) {
                     T* dst = g.data() + static_cast<std::size_t>(ids[i]) * width;
                     const T* src = on->grad.data() + i * width;
                     for (int j = 0; j < width; ++j) dst[j] += src[j];
                   }
                 });
  }
  return result;
}

template <typename T>
Tensor<T> Unfold(const Tensor<T>& x, int kernel, int stride, int pad) {
  if (x.rank() != 3 || kernel <= 0 || stride <= 0 || pad < 0) {
    throw ShapeError("Unfold " + ShapeToString(x.shape()));
  }
  const int batch = x.dim(0), steps = x.dim(1), width = x.dim(2);
  const int out_steps = (steps + 2 * pad - kernel) / stride + 1;
  if (steps + 2 * pad < kernel || out_steps <= 0) {
    throw ShapeError("Unfold: " + std::to_string(steps) +
                     " steps shorter than kernel " + std::to_string(kernel));
  }
  const int out_width = kernel * width;
  Tape<T>* tape = RecordingTape<T>({&x});
  auto xd = x.data();
  std::vector<T> out(static_cast<std::size_t>(batch) * out_steps * out_width, T(0));
  for (int b = 0; b < batch; ++b)
    for (int t = 0; t < out_steps; ++t)
      for (int j = 0; j < kernel; ++j) {
        const int src = t * stride + j - pad;
        if (src < 0 || src >= steps) continue;
        std::copy_n(xd.data() + (static_cast<std::size_t>(b) * steps + src) * width, width,
                    out.data() + (static_cast<std::size_t>(b) * out_steps + t) * out_width +
                        static_cast<std::size_t>(j) * width);
      }
  Tensor<T> result =
      MakeOutput<T>({batch, out_steps, out_width}, std::move(out), "Unfold", tape);
  if (tape) {
    tape->Record("Unfold", result.node(),
                 [xn = x.node(), on = result.node(), batch, steps, width, out_steps,
                  out_width, kernel, stride, pad] {
                   auto& g = GradOf(xn);
                   for (int b = 0; b < batch; ++b)
                     for (int t = 0; t < out_steps; ++t)
                       for (int j = 0; j < kernel; ++j) {
                         const int src = t * stride + j - pad;
                         if (src < 0 || src >= steps) continue;
                         T* dst = g.data() + (static_cast<std::size_t>(b) * steps + src) * width;
                         const T* from = on->grad.data() +
                             (static_cast<std::size_t>(b) * out_steps + t) * out_width +
                             static_cast<std::size_t>(j) * width;
                         for (int i = 0; i < width; ++i) dst[i] += from[i];
                       }
                 });
  }
  return result;
}

template <typename T>
Tensor<T> Dropout(const Tensor<T>& x, double p, std::mt19937_64& rng) {
  if (p <= 0.0) return x;
  if (p >= 1.0) throw Error("dropout probability must be < 1");
  std::bernoulli_distribution keep(1.0 - p);
  const T scale = static_cast<T>(1.0 / (1.0 - p));
  std::vector<T> mask(x.size());
  for (T& m : mask) m = keep(rng) ? scale : T(0);
  return Mul(x, Tensor<T>(x.shape(), std::move(mask)));
}

template <typename T>
Tensor<T> CrossEntropy(const Tensor<T>& logits, std::span<const int> targets,
                       T smoothing, int ignore_index, int* counted) {
  if (logits.rank() != 2 || static_cast<std::size_t>(logits.dim(0)) != targets.size()) {
    throw ShapeError("CrossEntropy logits " + ShapeToString(logits.shape()) +
                     " for " + std::to_string(targets.size()) + " targets");
  }
  CheckFinite(logits.data(), "CrossEntropy input");
  const int rows = logits.dim(0), vocab = logits.dim(1);
  Tape<T>* tape = RecordingTape<T>({&logits});
  auto ld = logits.data();
  std::vector<T> probs(logits.size());
  T loss = 0;
  int count = 0;
  for (int r = 0; r < rows; ++r) {
    const int target = targets[r];
    if (target == ignore_index) continue;
    if (target < 0 || target >= vocab) {
      throw ShapeError("CrossEntropy target " + std::to_string(target) +
                       " outside vocabulary of " + std::to_string(vocab));
    }
    const T* row = ld.data() + static_cast<std::size_t>(r) * vocab;
    T max_v = *std::max_element(row, row + vocab);
    T total = 0;
    for (int v = 0; v < vocab; ++v) total += std::exp(row[v] - max_v);
    const T log_z = max_v + std::log(total);
    T sum_logp = 0;
    for (int v = 0; v < vocab; ++v) {
      const T logp = row[v] - log_z;
      probs[static_cast<std::size_t>(r) * vocab + v] = std::exp(logp);
      sum_logp += logp;
    }
    loss -= (T(1) - smoothing) * (row[target] - log_z) + smoothing * sum_logp / vocab;
    ++count;
  }
  if (count == 0) throw Error("CrossEntropy: every target is ignored");
  if (counted) *counted = count;
  loss /= count;
  Tensor<T> result = MakeOutput<T>({1}, {loss}, "CrossEntropy", tape);
  if (tape) {
    tape->Record("CrossEntropy", result.node(),
                 [ln = logits.node(), on = result.node(), probs = std::move(probs),
                  targets = std::vector<int>(targets.begin(), targets.end()),
                  smoothing, ignore_index, rows, vocab, count] {
                   auto& g = GradOf(ln);
                   const T upstream = on->grad[0] / count;
                   const T uniform = smoothing / vocab;
                   for (int r = 0; r < rows; ++r) {
                     if (targets[r] == ignore_index) continue;
                     T* grow = g.data() + static_cast<std::size_t>(r) * vocab;
                     const T* prow = probs.data() + static_cast<std::size_t>(r) * vocab;
                     for (int v = 0; v < vocab; ++v) {
                       T q = uniform + (v == targets[r] ? T(1) - smoothing : T(0));
                       grow[v] += upstream * (prow[v] - q);
                     }
                   }
                 });
  }
  return result;
}

#define SLT_INSTANTIATE_OPS(T)                                                  \
  template void CheckFinite<T>(std::span<const T>, const char*);               \
  template Tensor<T> Add<T>(const Tensor<T>&, const Tensor<T>&);               \
  template Tensor<T> Sub<T>(const Tensor<T>&, const Tensor<T>&);               \
  template Tensor<T> Mul<T>(const Tensor<T>&, const Tensor<T>&);               \
  template Tensor<T> Scale<T>(const Tensor<T>&, T);                            \
  template Tensor<T> Relu<T>(const Tensor<T>&);                                \
  template Tensor<T> Sum<T>(const Tensor<T>&);                                 \
  template Tensor<T> Mean<T>(const Tensor<T>&);                                \
  template Tensor<T> Reshape<T>(const Tensor<T>&, Shape);                      \
  template Tensor<T> MatMul<T>(const Tensor<T>&, const Tensor<T>&);            \
  template Tensor<T> Linear<T>(const Tensor<T>&, const Tensor<T>&,             \
                               const Tensor<T>&);                              \
  template Tensor<T> Softmax<T>(const Tensor<T>&, int);                        \
  template Tensor<T> LayerNorm<T>(const Tensor<T>&, const Tensor<T>&,          \
                                  const Tensor<T>&, T);                        \
  template Tensor<T> ScaledDotAttention<T>(const Tensor<T>&, const Tensor<T>&, \
                                           const Tensor<T>&,                   \
                                           const AttentionMask*);              \
  template Tensor<T> SplitHeads<T>(const Tensor<T>&, int);                     \
  template Tensor<T> MergeHeads<T>(const Tensor<T>&, int);                     \
  template Tensor<T> Embedding<T>(const Tensor<T>&, std::span<const int>,      \
                                  const Shape&);                               \
  template Tensor<T> Unfold<T>(const Tensor<T>&, int, int, int);               \
  template Tensor<T> Dropout<T>(const Tensor<T>&, double, std::mt19937_64&);   \
  template Tensor<T> CrossEntropy<T>(const Tensor<T>&, std::span<const int>,   \
                                     T, int, int*);

SLT_INSTANTIATE_OPS(float)
SLT_INSTANTIATE_OPS(double)

#undef SLT_INSTANTIATE_OPS

}  // namespace ops
}  // namespace slt
