#include "clauseviz/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <new>

#include <png.h>

#include "clauseviz/json_io.hpp"

namespace clauseviz {

namespace {

constexpr long long kMaxPixels = 1LL << 28;
constexpr int kMaxSide = 1 << 15;

void append(std::string& out, const char* fmt, auto... args) {
    char buf[256];
    const int n = std::snprintf(buf, sizeof buf, fmt, args...);
    out.append(buf, static_cast<std::size_t>(std::min<int>(n, sizeof buf - 1)));
}

std::vector<Edge> draw_order(const std::vector<Edge>& edges) {
    std::vector<Edge> sorted = edges;
    std::stable_sort(sorted.begin(), sorted.end(), [](const Edge& a, const Edge& b) {
        if (a.weight != b.weight) return a.weight < b.weight;
        if (a.u != b.u) return a.u < b.u;
        return a.v < b.v;
    });
    return sorted;
}

double max_weight(const std::vector<Edge>& edges) {
    double m = 0.0;
    for (const Edge& e : edges) m = std::max(m, e.weight);
    return m;
}

}  // namespace

double node_radius(const RenderStyle& style, std::uint32_t members) {
    if (style.radius_policy == RadiusPolicy::Fixed) return style.base_radius;
    const double r = style.base_radius * std::sqrt(static_cast<double>(std::max<std::uint32_t>(members, 1)));
    return std::clamp(r, style.min_radius, style.max_radius);
}

double edge_opacity(const RenderStyle& style, double weight, double max_weight) {
    const double ratio = max_weight > 0 ? weight / max_weight : 1.0;
    return std::clamp(ratio, style.min_opacity, style.max_opacity);
}

std::pair<double, double> to_canvas(const RenderStyle& style, double x, double y) {
    const double side = std::min(style.width, style.height);
    const double margin = style.margin * side;
    const double scale = side - 2 * margin;
    const double ox = (style.width - scale) * 0.5;
    const double oy = (style.height - scale) * 0.5;
    return {ox + x * scale, oy + y * scale};
}

std::vector<Rgb> node_colors(const FrameState& frame, const Palette& palette) {
    std::vector<Rgb> out;
    out.reserve(frame.heats.size());
    for (double h : frame.heats) out.push_back(heat_to_color(std::clamp(h, 0.0, 1.0), palette));
    return out;
}

std::string render_svg(const FrameState& frame, const RenderStyle& style) {
    std::string out;
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    append(out, "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"%d\" height=\"%d\" viewBox=\"0 0 %d %d\">\n",
           style.width, style.height, style.width, style.height);
    append(out, "<rect x=\"0\" y=\"0\" width=\"%d\" height=\"%d\" fill=\"%s\"/>\n", style.width, style.height,
           to_hex(style.background).c_str());

    const auto n = static_cast<std::size_t>(frame.positions.cols());
    if (!frame.edges.empty()) {
        append(out, "<g stroke=\"%s\" stroke-width=\"%.2f\" stroke-linecap=\"round\">\n", to_hex(style.edge_color).c_str(),
               style.edge_width);
        const double heaviest = max_weight(frame.edges);
        for (const Edge& e : draw_order(frame.edges)) {
            if (e.u >= n || e.v >= n) continue;
            const auto [x1, y1] = to_canvas(style, frame.positions(0, e.u), frame.positions(1, e.u));
            const auto [x2, y2] = to_canvas(style, frame.positions(0, e.v), frame.positions(1, e.v));
            append(out, "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke-opacity=\"%.3f\"/>\n", x1, y1, x2, y2,
                   edge_opacity(style, e.weight, heaviest));
        }
        out += "</g>\n";
    }
    const std::vector<Rgb> colors = node_colors(frame, style.palette);
    for (std::size_t i = 0; i < n && i < colors.size(); ++i) {
        const auto [x, y] = to_canvas(style, frame.positions(0, i), frame.positions(1, i));
        const std::uint32_t m = i < frame.members.size() ? frame.members[i] : 1;
        append(out, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"%.2f\" fill=\"%s\"/>\n", x, y, node_radius(style, m),
               to_hex(colors[i]).c_str());
    }
    out += "</svg>\n";
    return out;
}

namespace {

class Canvas {
public:
    Canvas(int width, int height, Rgb background) : width_(width), height_(height) {
        if (width < 1 || height < 1 || width > kMaxSide || height > kMaxSide ||
            static_cast<long long>(width) * height > kMaxPixels) {
            throw RenderError(RenderError::Kind::AllocationFailure,
                              "canvas " + std::to_string(width) + "x" + std::to_string(height) + " is not allocatable");
        }
        try {
            data_.resize(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3);
        } catch (const std::bad_alloc&) {
            throw RenderError(RenderError::Kind::AllocationFailure, "out of memory for canvas");
        }
        for (std::size_t i = 0; i < data_.size(); i += 3) {
            data_[i] = background.r;
            data_[i + 1] = background.g;
            data_[i + 2] = background.b;
        }
    }

    void blend(int x, int y, Rgb c, double alpha) {
        if (x < 0 || y < 0 || x >= width_ || y >= height_ || alpha <= 0) return;
        alpha = std::min(alpha, 1.0);
        const std::size_t i = (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)) * 3;
        data_[i] += static_cast<float>((c.r - data_[i]) * alpha);
        data_[i + 1] += static_cast<float>((c.g - data_[i + 1]) * alpha);
        data_[i + 2] += static_cast<float>((c.b - data_[i + 2]) * alpha);
    }

    /// Anti-aliased line: coverage falls off linearly with distance from the segment.
    void line(double x1, double y1, double x2, double y2, double width, Rgb c, double alpha) {
        const double half = width * 0.5;
        const int x0 = static_cast<int>(std::floor(std::min(x1, x2) - half - 1));
        const int xe = static_cast<int>(std::ceil(std::max(x1, x2) + half + 1));
        const int y0 = static_cast<int>(std::floor(std::min(y1, y2) - half - 1));
        const int ye = static_cast<int>(std::ceil(std::max(y1, y2) + half + 1));
        const double dx = x2 - x1;
        const double dy = y2 - y1;
        const double len2 = dx * dx + dy * dy;
        for (int y = std::max(y0, 0); y <= std::min(ye, height_ - 1); ++y) {
            for (int x = std::max(x0, 0); x <= std::min(xe, width_ - 1); ++x) {
                const double px = x + 0.5;
                const double py = y + 0.5;
                double t = len2 > 0 ? ((px - x1) * dx + (py - y1) * dy) / len2 : 0.0;
                t = std::clamp(t, 0.0, 1.0);
                const double d = std::hypot(px - (x1 + t * dx), py - (y1 + t * dy));
                const double coverage = std::clamp(half + 0.5 - d, 0.0, 1.0);
                if (coverage > 0) blend(x, y, c, alpha * coverage);
            }
        }
    }

    void disc(double cx, double cy, double r, Rgb c) {
        const int x0 = static_cast<int>(std::floor(cx - r - 1));
        const int x1 = static_cast<int>(std::ceil(cx + r + 1));
        const int y0 = static_cast<int>(std::floor(cy - r - 1));
        const int y1 = static_cast<int>(std::ceil(cy + r + 1));
        for (int y = std::max(y0, 0); y <= std::min(y1, height_ - 1); ++y) {
            for (int x = std::max(x0, 0); x <= std::min(x1, width_ - 1); ++x) {
                const double d = std::hypot(x + 0.5 - cx, y + 0.5 - cy);
                blend(x, y, c, std::clamp(r + 0.5 - d, 0.0, 1.0));
            }
        }
    }

    Image image() const {
        Image img;
        img.width = width_;
        img.height = height_;
        img.pixels.resize(data_.size());
        for (std::size_t i = 0; i < data_.size(); ++i) {
            img.pixels[i] = static_cast<std::uint8_t>(std::clamp(std::lround(data_[i]), 0L, 255L));
        }
        return img;
    }

private:
    int width_;
    int height_;
    std::vector<float> data_;
};

}  // namespace

Image rasterize(const FrameState& frame, const RenderStyle& style) {
    Canvas canvas(style.width, style.height, style.background);
    const auto n = static_cast<std::size_t>(frame.positions.cols());
    const double heaviest = max_weight(frame.edges);
    for (const Edge& e : draw_order(frame.edges)) {
        if (e.u >= n || e.v >= n) continue;
        const auto [x1, y1] = to_canvas(style, frame.positions(0, e.u), frame.positions(1, e.u));
        const auto [x2, y2] = to_canvas(style, frame.positions(0, e.v), frame.positions(1, e.v));
        canvas.line(x1, y1, x2, y2, style.edge_width, style.edge_color, edge_opacity(style, e.weight, heaviest));
    }
    const std::vector<Rgb> colors = node_colors(frame, style.palette);
    for (std::size_t i = 0; i < n && i < colors.size(); ++i) {
        const auto [x, y] = to_canvas(style, frame.positions(0, i), frame.positions(1, i));
        const std::uint32_t m = i < frame.members.size() ? frame.members[i] : 1;
        canvas.disc(x, y, node_radius(style, m), colors[i]);
    }
    return canvas.image();
}

namespace {

void write_to_vector(png_structp png, png_bytep data, png_size_t length) {
    auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + length);
}

void flush_nothing(png_structp) {}

}  // namespace

std::vector<std::uint8_t> encode_png(const Image& image) {
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw RenderError(RenderError::Kind::AllocationFailure, "png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw RenderError(RenderError::Kind::AllocationFailure, "png_create_info_struct failed");
    }
    std::vector<std::uint8_t> out;
    std::vector<png_bytep> rows(static_cast<std::size_t>(image.height));
    for (int y = 0; y < image.height; ++y) {
        rows[static_cast<std::size_t>(y)] = const_cast<png_bytep>(image.pixels.data()) + static_cast<std::size_t>(y) * image.width * 3;
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw RenderError(RenderError::Kind::Io, "PNG encoding failed");
    }
    png_set_write_fn(png, &out, write_to_vector, flush_nothing);
    png_set_IHDR(png, info, static_cast<png_uint_32>(image.width), static_cast<png_uint_32>(image.height), 8,
                 PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_set_compression_level(png, 6);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return out;
}

namespace {

void write_file(const std::filesystem::path& path, const void* data, std::size_t size) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
    if (!out) throw RenderError(RenderError::Kind::Io, "cannot write " + path.string());
}

}  // namespace

void write_png(const std::filesystem::path& path, const Image& image) {
    const auto bytes = encode_png(image);
    write_file(path, bytes.data(), bytes.size());
}

std::vector<std::uint8_t> render_png(const FrameState& frame, const RenderStyle& style) {
    return encode_png(rasterize(frame, style));
}

std::string encoder_command(const std::filesystem::path& out_dir, double fps) {
    char rate[32];
    std::snprintf(rate, sizeof rate, "%g", fps);
    const std::string dir = out_dir.string();
    return "ffmpeg -y -framerate " + std::string(rate) + " -i " + dir + "/frame-%06d.png -c:v libx264 -pix_fmt yuv420p " +
           dir + "/clauseviz.mp4";
}

namespace {

nlohmann::json style_json(const RenderStyle& s) {
    return {{"width", s.width},
            {"height", s.height},
            {"background", to_hex(s.background)},
            {"edge_color", to_hex(s.edge_color)},
            {"edge_width", s.edge_width},
            {"radius", s.radius_policy == RadiusPolicy::Fixed ? "fixed" : "sqrt-members"},
            {"base_radius", s.base_radius},
            {"min_radius", s.min_radius},
            {"max_radius", s.max_radius},
            {"min_opacity", s.min_opacity},
            {"max_opacity", s.max_opacity},
            {"margin", s.margin}};
}

}  // namespace

ExportResult export_sequence(Session& session, const ExportOptions& options) {
    if (options.frames == 0) throw std::invalid_argument("frame count must be positive");
    if (!(options.fps > 0)) throw std::invalid_argument("fps must be positive");
    if (!session.shared_log()->closed()) throw std::logic_error("export needs a complete event log");
    std::error_code ec;
    std::filesystem::create_directories(options.out_dir, ec);
    if (ec) throw RenderError(RenderError::Kind::Io, "cannot create " + options.out_dir.string() + ": " + ec.message());

    const std::size_t total = session.shared_log()->size();
    const std::size_t per_frame =
        options.events_per_frame > 0 ? options.events_per_frame : std::max<std::size_t>(1, (total + options.frames - 1) / options.frames);
    session.set_chunk_policy(ChunkPolicy::fixed_size(per_frame));
    session.play();

    nlohmann::json frames = nlohmann::json::array();
    ExportResult result;
    char name[32];
    for (std::size_t f = 0; f < options.frames; ++f) {
        if (options.relayout_every > 0 && f > 0 && f % options.relayout_every == 0) {
            session.trigger_relayout();
            session.wait_relayout();
            session.play();
        }
        const FrameState& frame = session.tick();
        nlohmann::json entry = {{"index", f}, {"cursor", frame.cursor}, {"layout_generation", frame.layout_generation}};
        if (options.png) {
            std::snprintf(name, sizeof name, "frame-%06zu.png", f);
            write_png(options.out_dir / name, rasterize(frame, options.style));
            entry["png"] = name;
        }
        if (options.svg) {
            std::snprintf(name, sizeof name, "frame-%06zu.svg", f);
            const std::string svg = render_svg(frame, options.style);
            write_file(options.out_dir / name, svg.data(), svg.size());
            entry["svg"] = name;
        }
        frames.push_back(std::move(entry));
        ++result.frames_written;
    }
    session.take_notifications();

    result.encoder_command = encoder_command(options.out_dir, options.fps);
    // Relative to the output directory, so the manifest does not depend on where it was written.
    const std::string portable_command = encoder_command(".", options.fps);
    nlohmann::json manifest = {{"format", "clauseviz-frames"},
                               {"version", 1},
                               {"fps", options.fps},
                               {"frame_count", options.frames},
                               {"events_per_frame", per_frame},
                               {"relayout_every", options.relayout_every},
                               {"log_length", total},
                               {"seed", session.config().layout.seed},
                               {"config", to_json(session.config())},
                               {"style", style_json(options.style)},
                               {"frames", std::move(frames)},
                               {"encoder_command", portable_command}};
    // The chunk policy is forced by the export, so record the effective value.
    manifest["config"]["events_per_frame"] = per_frame;
    result.manifest = options.out_dir / "manifest.json";
    const std::string text = manifest.dump(2) + "\n";
    write_file(result.manifest, text.data(), text.size());
    return result;
}

}  // namespace clauseviz
