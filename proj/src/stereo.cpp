#include "lzeval/stereo.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace lzeval {

size_t DisparityMap::valid_count() const {
    size_t n = 0;
    for (float v : d) n += std::isfinite(v) ? 1 : 0;
    return n;
}

void BlockMatchParams::validate() const {
    if (block < 5 || block % 2 == 0) throw InputError("block size must be odd and >= 5");
    if (min_disp < 0) throw InputError("min_disp must be >= 0");
    if (max_disp <= min_disp) throw InputError("max_disp must exceed min_disp");
    if (!(texture_threshold >= 0.0)) throw InputError("texture_threshold must be >= 0");
    if (!(uniqueness_ratio >= 1.0)) throw InputError("uniqueness_ratio must be >= 1");
    if (!(lr_tolerance >= 0.0)) throw InputError("lr_tolerance must be >= 0");
}

uint64_t BlockMatchParams::hash() const {
    auto mix = [](uint64_t h, uint64_t v) {
        h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        return h;
    };
    auto dbits = [](double v) {
        uint64_t u;
        std::memcpy(&u, &v, 8);
        return u;
    };
    uint64_t h = 0xcbf29ce484222325ull;
    h = mix(h, static_cast<uint64_t>(block));
    h = mix(h, static_cast<uint64_t>(min_disp));
    h = mix(h, static_cast<uint64_t>(max_disp));
    h = mix(h, dbits(texture_threshold));
    h = mix(h, dbits(uniqueness_ratio));
    h = mix(h, dbits(lr_tolerance));
    return h;
}

namespace {

std::vector<uint8_t> quantize255(const GrayImage& img) {
    std::vector<uint8_t> q(img.data.size());
    for (size_t i = 0; i < img.data.size(); ++i) {
        float v = img.data[i];
        v = v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v);
        q[i] = static_cast<uint8_t>(std::lround(v * 255.0f));
    }
    return q;
}

// Block intensity variance mapped back to [0,1] units. Shared verbatim by the
// fast and reference paths so their float results match exactly.
inline double block_variance01(uint64_t sum, uint64_t sum_sq, int n_px) {
    double n = static_cast<double>(n_px);
    return (static_cast<double>(sum_sq) * n - static_cast<double>(sum) * static_cast<double>(sum)) /
           (n * n * 255.0 * 255.0);
}

constexpr int32_t kNoCost = std::numeric_limits<int32_t>::max();

// Winner selection over one pixel's candidate costs (contiguous, nd_count
// entries, all populated): strict minimum (smallest disparity wins ties),
// uniqueness gate against the best cost outside +/-1 of the winner, parabolic
// sub-pixel refinement clamped to +/-0.5 px.
inline float select_disparity(const int32_t* cost, int nd_count, const BlockMatchParams& p) {
    int best_i = 0;
    int32_t best_c = cost[0];
    for (int i = 1; i < nd_count; ++i) {
        if (cost[i] < best_c) {
            best_c = cost[i];
            best_i = i;
        }
    }
    int32_t second = kNoCost;
    for (int i = 0; i < nd_count; ++i) {
        if (i >= best_i - 1 && i <= best_i + 1) continue;
        second = std::min(second, cost[i]);
    }
    if (second != kNoCost &&
        static_cast<double>(best_c) * p.uniqueness_ratio >= static_cast<double>(second)) {
        return DisparityMap::kInvalid;
    }
    double offset = 0.0;
    if (best_i > 0 && best_i + 1 < nd_count) {
        double cm = cost[best_i - 1];
        double cp = cost[best_i + 1];
        double denom = cm + cp - 2.0 * static_cast<double>(best_c);
        if (denom > 0.0) {
            offset = 0.5 * (cm - cp) / denom;
            offset = std::clamp(offset, -0.5, 0.5);
        }
    }
    return static_cast<float>(p.min_disp + best_i + offset);
}

void check_pair(const GrayImage& left, const GrayImage& right, const BlockMatchParams& p) {
    p.validate();
    if (!left.same_size(right)) throw InputError("stereo pair sizes differ");
    if (left.width < p.block || left.height < p.block) {
        throw InputError("images smaller than the matching block");
    }
}

}  // namespace

DisparityMap compute_disparity(const GrayImage& left, const GrayImage& right,
                               const BlockMatchParams& p) {
    check_pair(left, right, p);
    const int w = left.width, h = left.height;
    const int half = p.block / 2;
    const int n_px = p.block * p.block;
    const int nd = p.max_disp - p.min_disp + 1;
    const int iw = w + 1;

    const std::vector<uint8_t> lq = quantize255(left);
    const std::vector<uint8_t> rq = quantize255(right);

    // Integral images of the left intensities and their squares (texture gate).
    std::vector<uint64_t> isum(static_cast<size_t>(iw) * (h + 1), 0);
    std::vector<uint64_t> isq(static_cast<size_t>(iw) * (h + 1), 0);
    for (int y = 0; y < h; ++y) {
        uint64_t row_s = 0, row_q = 0;
        const uint8_t* src = lq.data() + static_cast<size_t>(y) * w;
        for (int x = 0; x < w; ++x) {
            row_s += src[x];
            row_q += static_cast<uint64_t>(src[x]) * src[x];
            isum[static_cast<size_t>(y + 1) * iw + x + 1] =
                isum[static_cast<size_t>(y) * iw + x + 1] + row_s;
            isq[static_cast<size_t>(y + 1) * iw + x + 1] =
                isq[static_cast<size_t>(y) * iw + x + 1] + row_q;
        }
    }

    // One absolute-difference integral image per disparity candidate.
    std::vector<std::vector<uint32_t>> idiff(nd);
#pragma omp parallel for schedule(static)
    for (int di = 0; di < nd; ++di) {
        const int d = p.min_disp + di;
        std::vector<uint32_t>& integ = idiff[di];
        integ.assign(static_cast<size_t>(iw) * (h + 1), 0);
        for (int y = 0; y < h; ++y) {
            const uint8_t* lrow = lq.data() + static_cast<size_t>(y) * w;
            const uint8_t* rrow = rq.data() + static_cast<size_t>(y) * w;
            uint32_t row_sum = 0;
            uint32_t* out = integ.data() + static_cast<size_t>(y + 1) * iw;
            const uint32_t* above = integ.data() + static_cast<size_t>(y) * iw;
            for (int x = 0; x < w; ++x) {
                if (x >= d) {
                    int diff = static_cast<int>(lrow[x]) - static_cast<int>(rrow[x - d]);
                    row_sum += static_cast<uint32_t>(diff < 0 ? -diff : diff);
                }
                out[x + 1] = above[x + 1] + row_sum;
            }
        }
    }

    auto rect32 = [&](const std::vector<uint32_t>& integ, int x, int y) -> int32_t {
        const size_t r0 = static_cast<size_t>(y - half) * iw;
        const size_t r1 = static_cast<size_t>(y + half + 1) * iw;
        return static_cast<int32_t>(integ[r1 + x + half + 1] - integ[r0 + x + half + 1] -
                                    integ[r1 + x - half] + integ[r0 + x - half]);
    };
    auto rect64 = [&](const std::vector<uint64_t>& integ, int x, int y) -> uint64_t {
        const size_t r0 = static_cast<size_t>(y - half) * iw;
        const size_t r1 = static_cast<size_t>(y + half + 1) * iw;
        return integ[r1 + x + half + 1] - integ[r0 + x + half + 1] - integ[r1 + x - half] +
               integ[r0 + x - half];
    };

    DisparityMap out(w, h, p.hash());
#pragma omp parallel
    {
        std::vector<int32_t> costbuf(static_cast<size_t>(w) * nd);
#pragma omp for schedule(static)
        for (int y = half; y < h - half; ++y) {
            for (int di = 0; di < nd; ++di) {
                const int d = p.min_disp + di;
                for (int x = d + half; x < w - half; ++x) {
                    costbuf[static_cast<size_t>(x) * nd + di] = rect32(idiff[di], x, y);
                }
            }
            for (int x = half; x < w - half; ++x) {
                // Candidates whose right window stays inside the image.
                const int nd_count = std::min(nd, x - half - p.min_disp + 1);
                if (nd_count < 1) continue;
                double var = block_variance01(rect64(isum, x, y), rect64(isq, x, y), n_px);
                if (var < p.texture_threshold) continue;
                out.at(x, y) =
                    select_disparity(costbuf.data() + static_cast<size_t>(x) * nd, nd_count, p);
            }
        }
    }
    return out;
}

DisparityMap compute_disparity_reference(const GrayImage& left, const GrayImage& right,
                                         const BlockMatchParams& p) {
    check_pair(left, right, p);
    const int w = left.width, h = left.height;
    const int half = p.block / 2;
    const int n_px = p.block * p.block;
    const int nd = p.max_disp - p.min_disp + 1;

    const std::vector<uint8_t> lq = quantize255(left);
    const std::vector<uint8_t> rq = quantize255(right);
    auto lpx = [&](int x, int y) { return static_cast<int>(lq[static_cast<size_t>(y) * w + x]); };
    auto rpx = [&](int x, int y) { return static_cast<int>(rq[static_cast<size_t>(y) * w + x]); };

    DisparityMap out(w, h, p.hash());
    std::vector<int32_t> cost(nd);
    for (int y = half; y < h - half; ++y) {
        for (int x = half; x < w - half; ++x) {
            const int nd_count = std::min(nd, x - half - p.min_disp + 1);
            if (nd_count < 1) continue;

            uint64_t sum = 0, sum_sq = 0;
            for (int by = y - half; by <= y + half; ++by) {
                for (int bx = x - half; bx <= x + half; ++bx) {
                    int v = lpx(bx, by);
                    sum += static_cast<uint64_t>(v);
                    sum_sq += static_cast<uint64_t>(v) * v;
                }
            }
            if (block_variance01(sum, sum_sq, n_px) < p.texture_threshold) continue;

            for (int di = 0; di < nd_count; ++di) {
                const int d = p.min_disp + di;
                int32_t sad = 0;
                for (int by = y - half; by <= y + half; ++by) {
                    for (int bx = x - half; bx <= x + half; ++bx) {
                        sad += std::abs(lpx(bx, by) - rpx(bx - d, by));
                    }
                }
                cost[di] = sad;
            }
            out.at(x, y) = select_disparity(cost.data(), nd_count, p);
        }
    }
    return out;
}

DisparityMap compute_right_disparity(const GrayImage& left, const GrayImage& right,
                                     const BlockMatchParams& p) {
    // Mirroring both images swaps the roles while keeping the positive-
    // disparity search direction, so the same matcher applies.
    DisparityMap mirrored = compute_disparity(flip_horizontal(right), flip_horizontal(left), p);
    DisparityMap out(mirrored.width, mirrored.height, p.hash());
    for (int y = 0; y < out.height; ++y) {
        for (int x = 0; x < out.width; ++x) {
            out.at(x, y) = mirrored.at(out.width - 1 - x, y);
        }
    }
    return out;
}

DisparityMap left_right_check(const DisparityMap& d_left, const DisparityMap& d_right,
                              double tol) {
    if (!d_left.same_size(d_right)) throw InputError("disparity map sizes differ");
    if (!(tol >= 0.0)) throw InputError("tolerance must be >= 0");
    DisparityMap out = d_left;
    for (int y = 0; y < out.height; ++y) {
        for (int x = 0; x < out.width; ++x) {
            if (!out.is_valid(x, y)) continue;
            double dl = out.at(x, y);
            int xr = static_cast<int>(std::lround(x - dl));
            if (xr < 0 || xr >= out.width || !d_right.is_valid(xr, y) ||
                std::abs(dl - d_right.at(xr, y)) > tol) {
                out.at(x, y) = DisparityMap::kInvalid;
            }
        }
    }
    return out;
}

double bad_pixel_rate(const DisparityMap& est, const DisparityMap& gt, double tau) {
    if (!est.same_size(gt)) throw InputError("disparity map sizes differ");
    if (!(tau >= 0.0)) throw InputError("tau must be >= 0");
    size_t n_gt = 0, n_bad = 0;
    for (int y = 0; y < gt.height; ++y) {
        for (int x = 0; x < gt.width; ++x) {
            if (!gt.is_valid(x, y)) continue;
            ++n_gt;
            if (!est.is_valid(x, y) || std::abs(est.at(x, y) - gt.at(x, y)) > tau) ++n_bad;
        }
    }
    if (n_gt == 0) throw InputError("ground truth has no valid pixels");
    return 100.0 * static_cast<double>(n_bad) / static_cast<double>(n_gt);
}

}  // namespace lzeval
