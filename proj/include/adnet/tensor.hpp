#ifndef ADNET_TENSOR_HPP
#define ADNET_TENSOR_HPP

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "adnet/error.hpp"
#include "adnet/rng.hpp"

namespace adnet {

using Shape = std::vector<std::int64_t>;

inline std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
    os << ']';
    return os.str();
}

// Dense row-major N-dimensional array. Image batches use N x C x H x W order;
// element (n,c,h,w) lives at ((n*C + c)*H + h)*W + w.
template <class T>
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(Shape shape) : shape_(std::move(shape)) {
        data_.assign(checked_size(shape_), T(0));
    }

    Tensor(Shape shape, std::vector<T> values) : shape_(std::move(shape)), data_(std::move(values)) {
        if (checked_size(shape_) != data_.size())
            throw ShapeError("tensor: " + std::to_string(data_.size()) +
                             " values do not fill shape " + shape_str(shape_));
    }

    static Tensor full(Shape shape, T value) {
        Tensor t(std::move(shape));
        t.fill(value);
        return t;
    }

    static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }

    // Reproducible uniform fill in [lo, hi); identical seed, identical bits.
    static Tensor uniform(Shape shape, T lo, T hi, std::uint64_t seed) {
        Tensor t(std::move(shape));
        Rng rng(seed);
        for (T& v : t.data_) v = static_cast<T>(rng.uniform(lo, hi));
        return t;
    }

    std::size_t rank() const { return shape_.size(); }
    const Shape& shape() const { return shape_; }
    std::int64_t extent(std::size_t dim) const { return shape_.at(dim); }
    std::size_t size() const { return data_.size(); }

    const std::vector<T>& data() const { return data_; }
    std::vector<T>& data() { return data_; }
    const T* raw() const { return data_.data(); }
    T* raw() { return data_.data(); }

    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    T& at(std::int64_t i, std::int64_t j) { return data_[flat2(i, j)]; }
    const T& at(std::int64_t i, std::int64_t j) const { return data_[flat2(i, j)]; }

    T& at(std::int64_t c, std::int64_t h, std::int64_t w) { return data_[flat3(c, h, w)]; }
    const T& at(std::int64_t c, std::int64_t h, std::int64_t w) const { return data_[flat3(c, h, w)]; }

    T& at(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w) {
        return data_[flat4(n, c, h, w)];
    }
    const T& at(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w) const {
        return data_[flat4(n, c, h, w)];
    }

    void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

    // Same element count, new extents.
    Tensor reshaped(Shape shape) const {
        if (checked_size(shape) != data_.size())
            throw ShapeError("reshape: " + shape_str(shape_) + " has " +
                             std::to_string(data_.size()) + " elements, target " + shape_str(shape));
        Tensor t;
        t.shape_ = std::move(shape);
        t.data_ = data_;
        return t;
    }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    Tensor& operator+=(const Tensor& other) {
        require_same_shape(other, "+=");
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
        return *this;
    }

    Tensor& operator-=(const Tensor& other) {
        require_same_shape(other, "-=");
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
        return *this;
    }

    Tensor& operator*=(T s) {
        for (T& v : data_) v *= s;
        return *this;
    }

    // w -= a * g, the SGD update primitive.
    void axpy(T a, const Tensor& g) {
        require_same_shape(g, "axpy");
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += a * g.data_[i];
    }

private:
    static std::size_t checked_size(const Shape& shape) {
        if (shape.empty()) throw ShapeError("tensor: rank must be >= 1");
        std::size_t n = 1;
        for (std::int64_t e : shape) {
            if (e < 1) throw ShapeError("tensor: invalid extent " + std::to_string(e) +
                                        " in shape " + shape_str(shape));
            n *= static_cast<std::size_t>(e);
        }
        return n;
    }

    std::size_t flat2(std::int64_t i, std::int64_t j) const {
        return static_cast<std::size_t>(i * shape_[1] + j);
    }

    std::size_t flat3(std::int64_t c, std::int64_t h, std::int64_t w) const {
        return static_cast<std::size_t>((c * shape_[1] + h) * shape_[2] + w);
    }

    std::size_t flat4(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w) const {
        return static_cast<std::size_t>(((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w);
    }

    void require_same_shape(const Tensor& other, const char* op) const {
        if (!same_shape(other))
            throw ShapeError(std::string(op) + ": shape " + shape_str(shape_) +
                             " vs " + shape_str(other.shape_));
    }

    Shape shape_;
    std::vector<T> data_;
};

// c[i][j] = sum_p a[i][p] * b[p][j]
template <class T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
    if (a.rank() != 2 || b.rank() != 2)
        throw ShapeError("matmul: operands must be rank 2, got " +
                         shape_str(a.shape()) + " and " + shape_str(b.shape()));
    if (a.extent(1) != b.extent(0))
        throw ShapeError("matmul: inner extents differ, " +
                         shape_str(a.shape()) + " x " + shape_str(b.shape()));

    const std::size_t m = static_cast<std::size_t>(a.extent(0));
    const std::size_t k = static_cast<std::size_t>(a.extent(1));
    const std::size_t n = static_cast<std::size_t>(b.extent(1));

    Tensor<T> c({a.extent(0), b.extent(1)});
    const T* pa = a.raw();
    const T* pb = b.raw();
    T* pc = c.raw();
    for (std::size_t i = 0; i < m; ++i) {
        const T* arow = pa + i * k;
        T* crow = pc + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const T aip = arow[p];
            const T* brow = pb + p * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
        }
    }
    return c;
}

template <class T>
Tensor<T> transpose(const Tensor<T>& a) {
    if (a.rank() != 2) throw ShapeError("transpose: rank-2 tensor expected");
    const std::int64_t m = a.extent(0), n = a.extent(1);
    Tensor<T> t({n, m});
    for (std::int64_t i = 0; i < m; ++i)
        for (std::int64_t j = 0; j < n; ++j) t.at(j, i) = a.at(i, j);
    return t;
}

struct ConvGeometry {
    std::int64_t batch, channels, in_h, in_w;
    std::int64_t kernel, stride, pad;
    std::int64_t out_h, out_w;
};

inline ConvGeometry conv_geometry(const Shape& input, std::int64_t kernel,
                                  std::int64_t stride, std::int64_t pad) {
    if (input.size() != 4)
        throw ShapeError("im2col: rank-4 N x C x H x W input expected, got " + shape_str(input));
    if (kernel < 1 || stride < 1 || pad < 0)
        throw ShapeError("im2col: invalid kernel/stride/pad");
    ConvGeometry g{input[0], input[1], input[2], input[3], kernel, stride, pad, 0, 0};
    const std::int64_t span_h = g.in_h + 2 * pad - kernel;
    const std::int64_t span_w = g.in_w + 2 * pad - kernel;
    if (span_h < 0 || span_w < 0 || span_h % stride != 0 || span_w % stride != 0)
        throw ShapeError("im2col: geometry " + shape_str(input) + " k=" + std::to_string(kernel) +
                         " stride=" + std::to_string(stride) + " pad=" + std::to_string(pad) +
                         " has no integral output extent");
    g.out_h = span_h / stride + 1;
    g.out_w = span_w / stride + 1;
    return g;
}

// Receptive-field patches as columns: [C*k*k x N*out_h*out_w], zero padded
// outside the image. Row index is (c,ki,kj) row-major, column index is
// (n,oh,ow) row-major.
template <class T>
Tensor<T> im2col(const Tensor<T>& input, std::int64_t kernel, std::int64_t stride, std::int64_t pad) {
    const ConvGeometry g = conv_geometry(input.shape(), kernel, stride, pad);
    const std::int64_t rows = g.channels * kernel * kernel;
    const std::int64_t out_hw = g.out_h * g.out_w;
    Tensor<T> cols({rows, g.batch * out_hw});

    const T* src = input.raw();
    T* dst = cols.raw();
    const std::int64_t n_cols = g.batch * out_hw;
    for (std::int64_t r = 0; r < rows; ++r) {
        const std::int64_t kj = r % kernel;
        const std::int64_t ki = (r / kernel) % kernel;
        const std::int64_t c = r / (kernel * kernel);
        T* drow = dst + r * n_cols;
        for (std::int64_t n = 0; n < g.batch; ++n) {
            const T* plane = src + (n * g.channels + c) * g.in_h * g.in_w;
            for (std::int64_t oh = 0; oh < g.out_h; ++oh) {
                const std::int64_t ih = oh * stride - pad + ki;
                const bool row_ok = ih >= 0 && ih < g.in_h;
                for (std::int64_t ow = 0; ow < g.out_w; ++ow) {
                    const std::int64_t iw = ow * stride - pad + kj;
                    drow[(n * g.out_h + oh) * g.out_w + ow] =
                        (row_ok && iw >= 0 && iw < g.in_w) ? plane[ih * g.in_w + iw] : T(0);
                }
            }
        }
    }
    return cols;
}

// Adjoint of im2col: scatter-adds columns back onto an N x C x H x W tensor.
template <class T>
Tensor<T> col2im(const Tensor<T>& cols, const Shape& input_shape,
                 std::int64_t kernel, std::int64_t stride, std::int64_t pad) {
    const ConvGeometry g = conv_geometry(input_shape, kernel, stride, pad);
    const std::int64_t rows = g.channels * kernel * kernel;
    const std::int64_t n_cols = g.batch * g.out_h * g.out_w;
    if (cols.rank() != 2 || cols.extent(0) != rows || cols.extent(1) != n_cols)
        throw ShapeError("col2im: column tensor " + shape_str(cols.shape()) +
                         " does not match geometry of " + shape_str(input_shape));

    Tensor<T> out(input_shape);
    const T* src = cols.raw();
    T* dst = out.raw();
    for (std::int64_t r = 0; r < rows; ++r) {
        const std::int64_t kj = r % kernel;
        const std::int64_t ki = (r / kernel) % kernel;
        const std::int64_t c = r / (kernel * kernel);
        const T* srow = src + r * n_cols;
        for (std::int64_t n = 0; n < g.batch; ++n) {
            T* plane = dst + (n * g.channels + c) * g.in_h * g.in_w;
            for (std::int64_t oh = 0; oh < g.out_h; ++oh) {
                const std::int64_t ih = oh * stride - pad + ki;
                if (ih < 0 || ih >= g.in_h) continue;
                for (std::int64_t ow = 0; ow < g.out_w; ++ow) {
                    const std::int64_t iw = ow * stride - pad + kj;
                    if (iw < 0 || iw >= g.in_w) continue;
                    plane[ih * g.in_w + iw] += srow[(n * g.out_h + oh) * g.out_w + ow];
                }
            }
        }
    }
    return out;
}

// Inner product accumulated in double, for test oracles and norms.
template <class T>
double dot(const Tensor<T>& a, const Tensor<T>& b) {
    if (!a.same_shape(b)) throw ShapeError("dot: shapes differ");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * b[i];
    return s;
}

} // namespace adnet

#endif
