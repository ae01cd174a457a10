#include "uwimf/wavelet.hpp"

#include <algorithm>

namespace uwimf {

Subbands dwt2(const GrayImage& plane) {
    if (plane.empty()) throw InvalidInput("dwt2: empty plane");
    const int w = plane.width();
    const int h = plane.height();
    const int bw = (w + 1) / 2;
    const int bh = (h + 1) / 2;
    Subbands out{GrayImage(bw, bh), GrayImage(bw, bh), GrayImage(bw, bh), GrayImage(bw, bh), w, h};

    auto sample = [&](int x, int y) { return plane(std::min(x, w - 1), std::min(y, h - 1)); };
    for (int j = 0; j < bh; ++j) {
        for (int i = 0; i < bw; ++i) {
            const double a = sample(2 * i, 2 * j);
            const double b = sample(2 * i + 1, 2 * j);
            const double c = sample(2 * i, 2 * j + 1);
            const double d = sample(2 * i + 1, 2 * j + 1);
            out.LL(i, j) = 0.5 * (a + b + c + d);
            out.LH(i, j) = 0.5 * (-a - b + c + d);
            out.HL(i, j) = 0.5 * (-a + b - c + d);
            out.HH(i, j) = 0.5 * (a - b - c + d);
        }
    }
    return out;
}

GrayImage idwt2(const Subbands& bands) {
    const GrayImage& ll = bands.LL;
    if (ll.empty() || !ll.same_size(bands.LH) || !ll.same_size(bands.HL) ||
        !ll.same_size(bands.HH)) {
        throw InvalidInput("idwt2: subbands must be non-empty and share dimensions");
    }
    const int w = bands.original_width;
    const int h = bands.original_height;
    if (w < 1 || h < 1 || (w + 1) / 2 != ll.width() || (h + 1) / 2 != ll.height()) {
        throw InvalidInput("idwt2: original size is inconsistent with subband size");
    }
    GrayImage out(w, h);
    for (int j = 0; j < ll.height(); ++j) {
        for (int i = 0; i < ll.width(); ++i) {
            const double s = ll(i, j);
            const double v = bands.LH(i, j);
            const double u = bands.HL(i, j);
            const double t = bands.HH(i, j);
            const double block[4] = {0.5 * (s - v - u + t), 0.5 * (s - v + u - t),
                                     0.5 * (s + v - u - t), 0.5 * (s + v + u + t)};
            for (int k = 0; k < 4; ++k) {
                const int x = 2 * i + (k & 1);
                const int y = 2 * j + (k >> 1);
                if (x < w && y < h) out(x, y) = block[k];
            }
        }
    }
    return out;
}

std::array<Subbands, 3> dwt2_rgb(const LinearImage& img) {
    return {dwt2(extract_channel(img, 0)), dwt2(extract_channel(img, 1)),
            dwt2(extract_channel(img, 2))};
}

LinearImage idwt2_rgb(const std::array<Subbands, 3>& bands) {
    const GrayImage r = idwt2(bands[0]);
    const GrayImage g = idwt2(bands[1]);
    const GrayImage b = idwt2(bands[2]);
    if (!r.same_size(g) || !r.same_size(b)) throw InvalidInput("idwt2_rgb: channel size mismatch");
    LinearImage out(r.width(), r.height());
    for (std::size_t p = 0; p < out.pixel_count(); ++p) {
        out.at(p, 0) = r.at(p);
        out.at(p, 1) = g.at(p);
        out.at(p, 2) = b.at(p);
    }
    return out;
}

}  // namespace uwimf
