#include "chirality_lab/spectral.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <mutex>
#include <tuple>

#include "chirality_lab/simd_kernels.hpp"

namespace chirality_lab {

namespace {
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

struct SpectralPlan::Impl {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
};

SpectralPlan::SpectralPlan(const Grid2& grid) : grid_(grid), impl_(std::make_unique<Impl>()) {
    const int n = grid.n;
    const std::size_t total = grid.size();
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        auto* buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * total));
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        impl_->fwd = fftw_plan_dft_2d(n, n, buf, buf, FFTW_FORWARD, flags);
        impl_->bwd = fftw_plan_dft_2d(n, n, buf, buf, FFTW_BACKWARD, flags);
        fftw_free(buf);
    }
    const double base = 2.0 * std::numbers::pi / grid.length;
    k1_.resize(total); k2_.resize(total); k1o_.resize(total); k2o_.resize(total);
    d1_.resize(total); d2_.resize(total); dz_.resize(total); dzbar_.resize(total);
    lap_.resize(total); inv_lap_.resize(total); inv_dzbar_.resize(total); inv_dzbar_sq_.resize(total);
    const cplx I(0.0, 1.0);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            const std::size_t idx = grid.index(a, b);
            const double ka = base * mode(a), kb = base * mode(b);
            k1_[idx] = ka;
            k2_[idx] = kb;
            k1o_[idx] = (a == n / 2) ? 0.0 : ka;
            k2o_[idx] = (b == n / 2) ? 0.0 : kb;
            d1_[idx] = I * k1o_[idx];
            d2_[idx] = I * k2o_[idx];
            // (d1 - i d2)/2 and (d1 + i d2)/2
            dz_[idx] = 0.5 * (I * k1o_[idx] + k2o_[idx]);
            dzbar_[idx] = 0.5 * (I * k1o_[idx] - k2o_[idx]);
            const double k2sum = ka * ka + kb * kb;
            lap_[idx] = -k2sum;
            inv_lap_[idx] = (k2sum == 0.0) ? 0.0 : -1.0 / k2sum;
            const cplx s = dzbar_[idx];
            inv_dzbar_[idx] = (s == 0.0) ? cplx(0.0) : 1.0 / s;
            inv_dzbar_sq_[idx] = (s == 0.0) ? cplx(0.0) : 1.0 / (s * s);
        }
}

SpectralPlan::~SpectralPlan() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (impl_->fwd) fftw_destroy_plan(impl_->fwd);
    if (impl_->bwd) fftw_destroy_plan(impl_->bwd);
}

ComplexField SpectralPlan::forward(const ComplexField& f) const {
    require_same_grid(f.grid, grid_);
    ComplexField out = f;
    auto* p = reinterpret_cast<fftw_complex*>(out.data());
    fftw_execute_dft(impl_->fwd, p, p);
    return out;
}

ComplexField SpectralPlan::forward(const RealField& f) const { return forward(to_complex(f)); }

ComplexField SpectralPlan::inverse(const ComplexField& spec) const {
    require_same_grid(spec.grid, grid_);
    ComplexField out = spec;
    auto* p = reinterpret_cast<fftw_complex*>(out.data());
    fftw_execute_dft(impl_->bwd, p, p);
    const double inv = 1.0 / static_cast<double>(grid_.size());
    for (auto& v : out.values) v *= inv;
    return out;
}

ComplexField SpectralPlan::apply(const ComplexField& f, const std::vector<cplx>& symbol) const {
    ComplexField spec = forward(f);
    simd::active_kernels().cmul_inplace(spec.data(), symbol.data(), spec.size());
    return inverse(spec);
}

ComplexField SpectralPlan::apply(const ComplexField& f, const std::vector<double>& symbol) const {
    ComplexField spec = forward(f);
    simd::active_kernels().rscale(spec.data(), spec.data(), symbol.data(), spec.size());
    return inverse(spec);
}

RealField SpectralPlan::apply_real(const RealField& f, const std::vector<cplx>& symbol) const {
    return real_part(apply(to_complex(f), symbol));
}

RealField SpectralPlan::apply_real(const RealField& f, const std::vector<double>& symbol) const {
    return real_part(apply(to_complex(f), symbol));
}

const SpectralPlan& plan_for(const Grid2& grid) {
    static std::mutex m;
    static std::map<std::tuple<int, double, bool>, std::unique_ptr<SpectralPlan>> cache;
    std::lock_guard<std::mutex> lock(m);
    auto key = std::make_tuple(grid.n, grid.length, grid.origin_singular);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, std::make_unique<SpectralPlan>(grid)).first;
    return *it->second;
}

RealField d1(const RealField& f) { const auto& P = plan_for(f.grid); return P.apply_real(f, P.sym_d1()); }
RealField d2(const RealField& f) { const auto& P = plan_for(f.grid); return P.apply_real(f, P.sym_d2()); }
ComplexField d1(const ComplexField& f) { const auto& P = plan_for(f.grid); return P.apply(f, P.sym_d1()); }
ComplexField d2(const ComplexField& f) { const auto& P = plan_for(f.grid); return P.apply(f, P.sym_d2()); }
ComplexField d_z(const ComplexField& f) { const auto& P = plan_for(f.grid); return P.apply(f, P.sym_dz()); }
ComplexField d_zbar(const ComplexField& f) { const auto& P = plan_for(f.grid); return P.apply(f, P.sym_dzbar()); }
ComplexField d_z(const RealField& f) { return d_z(to_complex(f)); }
ComplexField d_zbar(const RealField& f) { return d_zbar(to_complex(f)); }

namespace {
// f = c1 + c2 j with c1 = re + i*i_part, c2 = j_part + i*k_part.
QuatField pair_op(const QuatField& f, bool first_bar, bool second_bar) {
    const ComplexField c1 = quat_first(f), c2 = quat_second(f);
    return quat_from_pair(first_bar ? d_zbar(c1) : d_z(c1), second_bar ? d_zbar(c2) : d_z(c2));
}
}  // namespace

// Real-to-real symbols act on both halves of a complex pair at once.
QuatField d1(const QuatField& f) { return quat_from_pair(d1(quat_first(f)), d1(quat_second(f))); }
QuatField d2(const QuatField& f) { return quat_from_pair(d2(quat_first(f)), d2(quat_second(f))); }

QuatField d_L(const QuatField& f) { return pair_op(f, false, false); }
QuatField d_R(const QuatField& f) { return pair_op(f, false, true); }
QuatField d_Lbar(const QuatField& f) { return pair_op(f, true, true); }
QuatField d_Rbar(const QuatField& f) { return pair_op(f, true, false); }

QuatField left_i(const QuatField& f) {
    QuatField out(f.grid);
    for (std::size_t p = 0; p < f.size(); ++p)
        out.set(p, {-f.comp[1][p], f.comp[0][p], -f.comp[3][p], f.comp[2][p]});
    return out;
}

QuatField right_i(const QuatField& f) {
    QuatField out(f.grid);
    for (std::size_t p = 0; p < f.size(); ++p)
        out.set(p, {-f.comp[1][p], f.comp[0][p], f.comp[3][p], -f.comp[2][p]});
    return out;
}

Vec2Field grad(const RealField& f) { return {d1(f), d2(f)}; }
Vec2Field grad_perp(const RealField& f) { return {-d2(f), d1(f)}; }
RealField div(const Vec2Field& a) { return d1(a.x1) + d2(a.x2); }
RealField curl(const Vec2Field& a) { return d1(a.x2) - d2(a.x1); }

RealField laplacian(const RealField& f) { const auto& P = plan_for(f.grid); return P.apply_real(f, P.sym_laplacian()); }
ComplexField laplacian(const ComplexField& f) { const auto& P = plan_for(f.grid); return P.apply(f, P.sym_laplacian()); }
RealField inv_laplacian(const RealField& f) {
    const auto& P = plan_for(f.grid);
    return P.apply_real(f, P.sym_inv_laplacian());
}
ComplexField inv_laplacian(const ComplexField& f) {
    const auto& P = plan_for(f.grid);
    return P.apply(f, P.sym_inv_laplacian());
}

HodgeParts hodge_decompose(const Vec2Field& a) {
    require_same_grid(a.x1.grid, a.x2.grid);
    HodgeParts out;
    out.alpha = inv_laplacian(div(a));
    out.beta = inv_laplacian(curl(a));
    out.mean1 = field_mean(a.x1);
    out.mean2 = field_mean(a.x2);
    return out;
}

Vec2Field hodge_reconstruct(const HodgeParts& parts) {
    Vec2Field g = grad(parts.alpha), r = grad_perp(parts.beta);
    Vec2Field out{g.x1 + r.x1, g.x2 + r.x2};
    for (auto& v : out.x1.values) v += parts.mean1;
    for (auto& v : out.x2.values) v += parts.mean2;
    return out;
}

ComplexField cauchy_solve(const ComplexField& g) {
    const auto& P = plan_for(g.grid);
    return P.apply(g, P.sym_inv_dzbar());
}

ComplexField inv_dzbar_sq_kernel_apply(const ComplexField& g) {
    const auto& P = plan_for(g.grid);
    return P.apply(g, P.sym_inv_dzbar_sq());
}

double spectral_tail_fraction(const ComplexField& f) {
    const auto& P = plan_for(f.grid);
    const ComplexField spec = P.forward(f);
    const int n = f.grid.n;
    double total = 0.0, tail = 0.0;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            const double e = std::norm(spec(a, b));
            total += e;
            if (3 * std::abs(P.mode(a)) > n || 3 * std::abs(P.mode(b)) > n) tail += e;
        }
    return total == 0.0 ? 0.0 : tail / total;
}

double spectral_tail_fraction(const RealField& f) { return spectral_tail_fraction(to_complex(f)); }

}  // namespace chirality_lab
