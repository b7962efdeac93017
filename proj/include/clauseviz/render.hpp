#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "clauseviz/heatmap.hpp"
#include "clauseviz/session.hpp"

namespace clauseviz {

enum class RadiusPolicy {
    Fixed,
    /// base_radius * sqrt(member count), clamped to [min_radius, max_radius].
    SqrtMembers,
};

struct RenderStyle {
    int width = 1920;
    int height = 1080;
    Rgb background{0x10, 0x10, 0x18};
    Rgb edge_color{0xB4, 0xB4, 0xB4};
    double edge_width = 1.0;
    RadiusPolicy radius_policy = RadiusPolicy::SqrtMembers;
    double base_radius = 3.0;
    double min_radius = 2.0;
    double max_radius = 24.0;
    /// Edge opacity is weight / heaviest weight, clamped to this range.
    double min_opacity = 0.05;
    double max_opacity = 1.0;
    /// Blank border as a fraction of the shorter canvas side.
    double margin = 0.04;
    Palette palette = default_palette();
};

class RenderError : public std::runtime_error {
public:
    enum class Kind { AllocationFailure, Io };
    RenderError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

double node_radius(const RenderStyle& style, std::uint32_t members);
double edge_opacity(const RenderStyle& style, double weight, double max_weight);
/// Unit-box position to canvas pixels, preserving aspect ratio.
std::pair<double, double> to_canvas(const RenderStyle& style, double x, double y);
/// Node colors for a frame, as drawn by both renderers.
std::vector<Rgb> node_colors(const FrameState& frame, const Palette& palette);

/// Byte-deterministic SVG: background, edges ordered by (weight, u, v), then
/// nodes in id order.
std::string render_svg(const FrameState& frame, const RenderStyle& style);

struct Image {
    int width = 0;
    int height = 0;
    /// Row-major RGB.
    std::vector<std::uint8_t> pixels;
    Rgb at(int x, int y) const {
        const std::size_t i = (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)) * 3;
        return {pixels[i], pixels[i + 1], pixels[i + 2]};
    }
};

/// Same scene as render_svg, anti-aliased. Throws RenderError(AllocationFailure)
/// for canvases that are empty or too large to allocate.
Image rasterize(const FrameState& frame, const RenderStyle& style);
std::vector<std::uint8_t> encode_png(const Image& image);
void write_png(const std::filesystem::path& path, const Image& image);
/// rasterize + encode_png.
std::vector<std::uint8_t> render_png(const FrameState& frame, const RenderStyle& style);

struct ExportOptions {
    std::filesystem::path out_dir;
    double fps = 30.0;
    std::size_t frames = 300;
    /// 0 spreads the whole log evenly over `frames`.
    std::size_t events_per_frame = 0;
    /// Relayout before every n-th frame; 0 never.
    std::size_t relayout_every = 0;
    bool png = true;
    bool svg = false;
    RenderStyle style;
};

struct ExportResult {
    std::size_t frames_written = 0;
    std::filesystem::path manifest;
    std::string encoder_command;
};

/// Plays a session whose log is complete, writing frame-%06d.png (and .svg
/// if asked) plus manifest.json into out_dir.
ExportResult export_sequence(Session& session, const ExportOptions& options);

/// Command line for assembling the frames with ffmpeg.
std::string encoder_command(const std::filesystem::path& out_dir, double fps);

}  // namespace clauseviz
