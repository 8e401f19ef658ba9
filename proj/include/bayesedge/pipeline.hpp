#pragma once

#include "detector.hpp"
#include "types.hpp"

#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <vector>

namespace bayesedge
{
    /// 3x3 dilation followed by 3x3 erosion. Out-of-image neighbours are ignored
    /// by both passes, which keeps the operator extensive and idempotent.
    Mask close_edges(const Mask &mask);
    EdgeMap close_edges(const EdgeMap &edges);

    struct ComponentSet
    {
        Labels labels;  // 0 = background
        int count = 0;
        std::vector<long> areas; // areas[k - 1] is the pixel count of label k
    };

    // Labels follow raster-scan discovery order.
    ComponentSet label_components(const Mask &mask, int connectivity);

    // 4-connected components of the non-edge pixels.
    ComponentSet segment_regions(const Mask &edges);

    // Counter-clockwise in (x, y) with collinear points dropped.
    PixelList convex_hull(PixelList points);

    double polygon_area(const PixelList &polygon);

    // Inside or on the boundary of a counter-clockwise convex polygon.
    bool hull_contains(const PixelList &hull, Pixel p);

    enum class Action
    {
        keep,
        fix,
        replace
    };

    std::string_view to_string(Action action);

    // replace above 1/4, fix for any smaller positive damage, keep otherwise.
    Action classify_damage(double fraction);

    struct RegionDamage
    {
        int region_id = 0;
        long region_area = 0;
        double damaged_area = 0.0;
        double fraction = 0.0;
        Action action = Action::keep;
        std::vector<PixelList> hulls;
    };

    struct DamageReport
    {
        std::vector<RegionDamage> regions;
    };

    struct PipelineConfig
    {
        DetectionConfig detection{};
        int frame_width = 2;           // edge frame added around the image before segmentation
        long min_region_area = 64;     // smaller regions are not reported
        int min_region_thickness = 5;  // chessboard radius; drops joint slivers between parallel edges
        double cluster_gap = 16.0;     // damage fragments closer than this are merged
        double min_damage_area = 4.0;  // hulls below this area are ignored
    };

    void validate(const PipelineConfig &cfg);

    /// Edge components that float inside a region become damage; each cluster's
    /// hull is charged to the region touching it most.
    DamageReport extract_damage(const GrayImage &img, const Mask &edges, const ComponentSet &regions,
                                const PipelineConfig &cfg = {});

    struct PipelineResult
    {
        Mask edges;
        Mask closed;
        ComponentSet regions;
        DamageReport report;
    };

    PipelineResult run_pipeline(const GrayImage &img, const PipelineConfig &cfg, std::uint64_t seed);

    // CSV `region_id,region_area,damaged_area,fraction,action`.
    void write_damage_csv(std::ostream &os, const DamageReport &report);

    // Copy of img with every hull boundary drawn at intensity 0.
    GrayImage damage_overlay(const GrayImage &img, const DamageReport &report);
} // namespace bayesedge
