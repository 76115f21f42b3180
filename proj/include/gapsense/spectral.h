#pragma once

// Welch cross/auto power spectral density with a periodic Hann taper.
// Density scaling 1 / (fs * sum w^2), one-sided (interior bins doubled),
// Pxy = conj(X) * Y, no detrending.

#include "gapsense/types.h"

#include <Eigen/Core>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

namespace gapsense {

struct WelchOptions {
    int fft_len = 4096;
    double overlap = 0.5;
};

/// Windowed block spectra of one signal, ready to be cross-multiplied with
/// the spectra of another signal of the same length.
template <typename Scalar>
class BlockSpectra {
public:
    using Complex = std::complex<Scalar>;
    using Spectrum = Eigen::Matrix<Complex, Eigen::Dynamic, 1>;

    template <typename Derived>
    BlockSpectra(const Eigen::MatrixBase<Derived>& x, double rate_hz, const WelchOptions& opt)
        : rate_hz_(rate_hz) {
        const auto len = static_cast<int>(x.size());
        if (len < 2) {
            throw SizeError("spectral estimate needs at least two samples");
        }
        const int nperseg = std::min(opt.fft_len, len);
        nfft_ = std::max(opt.fft_len, nperseg);
        const int step = std::max(1, nperseg - static_cast<int>(std::lround(opt.overlap * nperseg)));

        std::vector<Scalar> window(static_cast<std::size_t>(nperseg));
        Scalar wsum2 = 0;
        for (int i = 0; i < nperseg; ++i) {
            const Scalar w = Scalar(0.5) - Scalar(0.5) * std::cos(Scalar(2) * std::numbers::pi_v<Scalar> * i / nperseg);
            window[static_cast<std::size_t>(i)] = w;
            wsum2 += w * w;
        }
        scale_ = Scalar(1) / (static_cast<Scalar>(rate_hz) * wsum2);

        Eigen::FFT<Scalar> fft;
        fft.SetFlag(Eigen::FFT<Scalar>::HalfSpectrum);
        std::vector<Scalar> buf(static_cast<std::size_t>(nfft_), Scalar(0));
        std::vector<Complex> out;
        for (int start = 0; start + nperseg <= len; start += step) {
            bool nonzero = false;
            for (int i = 0; i < nperseg; ++i) {
                const auto v = static_cast<Scalar>(x[start + i]);
                nonzero = nonzero || v != Scalar(0);
                buf[static_cast<std::size_t>(i)] = v * window[static_cast<std::size_t>(i)];
            }
            silent_ = silent_ && !nonzero;
            fft.fwd(out, buf);
            blocks_.push_back(Eigen::Map<const Spectrum>(out.data(), static_cast<Eigen::Index>(out.size())));
        }
    }

    int nfft() const noexcept { return nfft_; }
    std::size_t block_count() const noexcept { return blocks_.size(); }
    bool silent() const noexcept { return silent_; }
    Eigen::Index bins() const noexcept { return nfft_ / 2 + 1; }
    double bin_hz() const noexcept { return rate_hz_ / nfft_; }

    /// One-sided cross spectral density conj(this) * other.
    Spectrum cross(const BlockSpectra& other) const {
        if (other.blocks_.size() != blocks_.size() || other.nfft_ != nfft_) {
            throw ValidationError("cross spectrum of segments with different lengths");
        }
        Spectrum acc = Spectrum::Zero(bins());
        for (std::size_t b = 0; b < blocks_.size(); ++b) {
            acc.array() += blocks_[b].array().conjugate() * other.blocks_[b].array();
        }
        acc *= scale_ / static_cast<Scalar>(blocks_.size());
        const Eigen::Index last = (nfft_ % 2 == 0) ? bins() - 1 : bins();
        for (Eigen::Index k = 1; k < last; ++k) {
            acc[k] *= Scalar(2);
        }
        return acc;
    }

private:
    double rate_hz_;
    int nfft_ = 0;
    Scalar scale_ = 0;
    bool silent_ = true;
    std::vector<Spectrum> blocks_;
};

/// Welch cross spectral density of two equal-length signals.
template <typename DX, typename DY>
auto welch_csd(const Eigen::MatrixBase<DX>& x, const Eigen::MatrixBase<DY>& y, double rate_hz,
               const WelchOptions& opt = {}) {
    using Scalar = typename DX::Scalar;
    if (x.size() != y.size()) {
        throw ValidationError("cross spectrum of signals with different lengths");
    }
    return BlockSpectra<Scalar>(x, rate_hz, opt).cross(BlockSpectra<Scalar>(y, rate_hz, opt));
}

/// Welch power spectral density (real, non-negative).
template <typename DX>
Eigen::Matrix<typename DX::Scalar, Eigen::Dynamic, 1> welch_psd(const Eigen::MatrixBase<DX>& x, double rate_hz,
                                                                  const WelchOptions& opt = {}) {
    using Scalar = typename DX::Scalar;
    const BlockSpectra<Scalar> s(x, rate_hz, opt);
    return s.cross(s).real();
}

} // namespace gapsense
