#include "bayesedge/pipeline.hpp"

#include "bayesedge/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <map>
#include <numeric>
#include <ostream>

namespace bayesedge
{
    namespace
    {
        Mask morph3(const Mask &in, bool dilate)
        {
            const int w = width(in), h = height(in);
            Mask out(h, w);
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x)
                {
                    bool acc = !dilate;
                    for (int dy = -1; dy <= 1; ++dy)
                        for (int dx = -1; dx <= 1; ++dx)
                        {
                            if (!in_bounds(in, x + dx, y + dy))
                                continue;
                            const bool v = in(y + dy, x + dx) != 0;
                            acc = dilate ? (acc || v) : (acc && v);
                        }
                    out(y, x) = acc ? 1 : 0;
                }
            return out;
        }

        long long cross(Pixel o, Pixel a, Pixel b)
        {
            return static_cast<long long>(a.x - o.x) * (b.y - o.y) - static_cast<long long>(a.y - o.y) * (b.x - o.x);
        }

        struct DisjointSets
        {
            std::vector<int> parent;
            explicit DisjointSets(int n) : parent(static_cast<std::size_t>(n)) { std::iota(parent.begin(), parent.end(), 0); }
            int find(int i)
            {
                while (parent[static_cast<std::size_t>(i)] != i)
                    i = parent[static_cast<std::size_t>(i)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(i)])];
                return i;
            }
            void unite(int a, int b) { parent[static_cast<std::size_t>(find(a))] = find(b); }
        };

        struct Box
        {
            int x0 = 0, y0 = 0, x1 = -1, y1 = -1;
            void add(Pixel p)
            {
                if (x1 < x0)
                {
                    x0 = x1 = p.x;
                    y0 = y1 = p.y;
                    return;
                }
                x0 = std::min(x0, p.x), x1 = std::max(x1, p.x);
                y0 = std::min(y0, p.y), y1 = std::max(y1, p.y);
            }
        };

        bool boxes_within(const Box &a, const Box &b, double gap)
        {
            const double dx = std::max({0, a.x0 - b.x1, b.x0 - a.x1});
            const double dy = std::max({0, a.y0 - b.y1, b.y0 - a.y1});
            return dx * dx + dy * dy <= gap * gap;
        }

        bool pixels_within(const PixelList &a, const PixelList &b, double gap)
        {
            const double g2 = gap * gap;
            for (const Pixel &p : a)
                for (const Pixel &q : b)
                {
                    const double dx = p.x - q.x, dy = p.y - q.y;
                    if (dx * dx + dy * dy <= g2)
                        return true;
                }
            return false;
        }

        // Chessboard distance to the nearest edge pixel, with the outside counted as edge.
        Labels edge_distance(const Mask &edges)
        {
            const int w = width(edges), h = height(edges);
            const int far = w + h;
            Labels d(h, w);
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x)
                {
                    if (edges(y, x))
                    {
                        d(y, x) = 0;
                        continue;
                    }
                    int best = std::min({x + 1, y + 1, far});
                    if (x > 0)
                        best = std::min(best, d(y, x - 1) + 1);
                    if (y > 0)
                    {
                        best = std::min(best, d(y - 1, x) + 1);
                        if (x > 0)
                            best = std::min(best, d(y - 1, x - 1) + 1);
                        if (x + 1 < w)
                            best = std::min(best, d(y - 1, x + 1) + 1);
                    }
                    d(y, x) = best;
                }
            for (int y = h - 1; y >= 0; --y)
                for (int x = w - 1; x >= 0; --x)
                {
                    int best = std::min({d(y, x), w - x, h - y});
                    if (x + 1 < w)
                        best = std::min(best, d(y, x + 1) + 1);
                    if (y + 1 < h)
                    {
                        best = std::min(best, d(y + 1, x) + 1);
                        if (x + 1 < w)
                            best = std::min(best, d(y + 1, x + 1) + 1);
                        if (x > 0)
                            best = std::min(best, d(y + 1, x - 1) + 1);
                    }
                    d(y, x) = best;
                }
            return d;
        }

        void draw_line(GrayImage &img, Pixel a, Pixel b)
        {
            int x = a.x, y = a.y;
            const int dx = std::abs(b.x - a.x), dy = -std::abs(b.y - a.y);
            const int sx = a.x < b.x ? 1 : -1, sy = a.y < b.y ? 1 : -1;
            int err = dx + dy;
            while (true)
            {
                if (in_bounds(img, x, y))
                    img(y, x) = 0.0;
                if (x == b.x && y == b.y)
                    break;
                const int e2 = 2 * err;
                if (e2 >= dy)
                    err += dy, x += sx;
                if (e2 <= dx)
                    err += dx, y += sy;
            }
        }
    } // namespace

    Mask close_edges(const Mask &mask) { return morph3(morph3(mask, true), false); }

    EdgeMap close_edges(const EdgeMap &edges) { return {close_edges(edges.mask), edges.threshold}; }

    ComponentSet label_components(const Mask &mask, int connectivity)
    {
        if (connectivity != 4 && connectivity != 8)
            throw InvalidArgument("connectivity must be 4 or 8");
        const int w = width(mask), h = height(mask);
        ComponentSet set{Labels::Zero(h, w), 0, {}};
        std::deque<Pixel> queue;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
            {
                if (!mask(y, x) || set.labels(y, x))
                    continue;
                const int label = ++set.count;
                long area = 0;
                set.labels(y, x) = label;
                queue.push_back({x, y});
                while (!queue.empty())
                {
                    const Pixel p = queue.front();
                    queue.pop_front();
                    ++area;
                    for (int dy = -1; dy <= 1; ++dy)
                        for (int dx = -1; dx <= 1; ++dx)
                        {
                            if ((!dx && !dy) || (connectivity == 4 && dx && dy))
                                continue;
                            const int nx = p.x + dx, ny = p.y + dy;
                            if (in_bounds(mask, nx, ny) && mask(ny, nx) && !set.labels(ny, nx))
                            {
                                set.labels(ny, nx) = label;
                                queue.push_back({nx, ny});
                            }
                        }
                }
                set.areas.push_back(area);
            }
        return set;
    }

    ComponentSet segment_regions(const Mask &edges) { return label_components((edges == 0).cast<std::uint8_t>(), 4); }

    PixelList convex_hull(PixelList points)
    {
        if (points.empty())
            throw InvalidArgument("convex hull needs at least one point");
        std::sort(points.begin(), points.end(), [](Pixel a, Pixel b) { return a.x != b.x ? a.x < b.x : a.y < b.y; });
        points.erase(std::unique(points.begin(), points.end()), points.end());
        if (points.size() < 3)
            return points;

        PixelList hull(2 * points.size());
        std::size_t k = 0;
        for (const Pixel &p : points)
        {
            while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0)
                --k;
            hull[k++] = p;
        }
        for (std::size_t i = points.size() - 1, lower = k + 1; i-- > 0;)
        {
            while (k >= lower && cross(hull[k - 2], hull[k - 1], points[i]) <= 0)
                --k;
            hull[k++] = points[i];
        }
        hull.resize(k - 1);
        return hull;
    }

    double polygon_area(const PixelList &polygon)
    {
        if (polygon.size() < 3)
            return 0.0;
        long long twice = 0;
        for (std::size_t i = 0; i < polygon.size(); ++i)
        {
            const Pixel a = polygon[i], b = polygon[(i + 1) % polygon.size()];
            twice += static_cast<long long>(a.x) * b.y - static_cast<long long>(b.x) * a.y;
        }
        return std::abs(static_cast<double>(twice)) / 2.0;
    }

    bool hull_contains(const PixelList &hull, Pixel p)
    {
        if (hull.empty())
            return false;
        if (hull.size() == 1)
            return hull[0] == p;
        if (hull.size() == 2)
        {
            const Pixel a = hull[0], b = hull[1];
            return cross(a, b, p) == 0 && std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x)
                   && std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
        }
        for (std::size_t i = 0; i < hull.size(); ++i)
            if (cross(hull[i], hull[(i + 1) % hull.size()], p) < 0)
                return false;
        return true;
    }

    std::string_view to_string(Action action)
    {
        switch (action)
        {
        case Action::keep:
            return "keep";
        case Action::fix:
            return "fix";
        case Action::replace:
            return "replace";
        }
        return "keep";
    }

    Action classify_damage(double fraction)
    {
        if (!(fraction >= 0.0 && fraction <= 1.0))
            throw InvalidArgument("damaged fraction must lie in [0, 1]");
        if (fraction > 0.25)
            return Action::replace;
        return fraction > 0.0 ? Action::fix : Action::keep;
    }

    void validate(const PipelineConfig &cfg)
    {
        validate(cfg.detection);
        if (cfg.frame_width < 0 || cfg.min_region_area < 1 || cfg.min_region_thickness < 0 || !(cfg.cluster_gap >= 0.0)
            || !(cfg.min_damage_area >= 0.0))
            throw InvalidArgument("pipeline sizes must be nonnegative");
    }

    DamageReport extract_damage(const GrayImage &img, const Mask &edges, const ComponentSet &regions,
                                const PipelineConfig &cfg)
    {
        validate(cfg);
        const int w = width(img), h = height(img);
        if (width(edges) != w || height(edges) != h || width(regions.labels) != w || height(regions.labels) != h)
            throw DimensionMismatch("image, edge map and regions must share dimensions");

        const Labels distance = edge_distance(edges);
        std::vector<int> thickness(static_cast<std::size_t>(regions.count + 1), 0);
        std::vector<Box> region_box(static_cast<std::size_t>(regions.count + 1));
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                if (const int r = regions.labels(y, x))
                {
                    thickness[static_cast<std::size_t>(r)] = std::max(thickness[static_cast<std::size_t>(r)], distance(y, x));
                    region_box[static_cast<std::size_t>(r)].add({x, y});
                }
        std::vector<char> reportable(static_cast<std::size_t>(regions.count + 1), 0);
        for (int r = 1; r <= regions.count; ++r)
            reportable[static_cast<std::size_t>(r)] = regions.areas[static_cast<std::size_t>(r - 1)] >= cfg.min_region_area
                                                      && thickness[static_cast<std::size_t>(r)] >= cfg.min_region_thickness;

        // Floating edge components: those not reaching the image border.
        const ComponentSet parts = label_components(edges, 8);
        std::vector<PixelList> part_pixels(static_cast<std::size_t>(parts.count + 1));
        std::vector<char> touches_border(static_cast<std::size_t>(parts.count + 1), 0);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                if (const int c = parts.labels(y, x))
                {
                    part_pixels[static_cast<std::size_t>(c)].push_back({x, y});
                    if (x == 0 || y == 0 || x == w - 1 || y == h - 1)
                        touches_border[static_cast<std::size_t>(c)] = 1;
                }
        std::vector<int> floating;
        std::vector<Box> part_box;
        for (int c = 1; c <= parts.count; ++c)
            if (!touches_border[static_cast<std::size_t>(c)])
            {
                floating.push_back(c);
                Box b;
                for (const Pixel &p : part_pixels[static_cast<std::size_t>(c)])
                    b.add(p);
                part_box.push_back(b);
            }

        DisjointSets clusters(static_cast<int>(floating.size()));
        for (std::size_t i = 0; i < floating.size(); ++i)
            for (std::size_t j = i + 1; j < floating.size(); ++j)
                if (boxes_within(part_box[i], part_box[j], cfg.cluster_gap)
                    && pixels_within(part_pixels[static_cast<std::size_t>(floating[i])],
                                     part_pixels[static_cast<std::size_t>(floating[j])], cfg.cluster_gap))
                    clusters.unite(static_cast<int>(i), static_cast<int>(j));
        std::map<int, PixelList> cluster_pixels;
        for (std::size_t i = 0; i < floating.size(); ++i)
        {
            auto &dst = cluster_pixels[clusters.find(static_cast<int>(i))];
            const auto &src = part_pixels[static_cast<std::size_t>(floating[i])];
            dst.insert(dst.end(), src.begin(), src.end());
        }

        struct Damage
        {
            PixelList hull;
            double area;
            int region;
        };
        std::vector<Damage> damages;
        std::vector<char> absorbed(static_cast<std::size_t>(regions.count + 1), 0);
        for (auto &[root, pixels] : cluster_pixels)
        {
            PixelList hull = convex_hull(pixels);
            const double area = polygon_area(hull);
            if (area < cfg.min_damage_area)
                continue;
            Box hull_box;
            for (const Pixel &p : hull)
                hull_box.add(p);

            // Regions lying wholly inside the hull are the damage itself.
            std::map<int, bool> inside;
            auto region_inside = [&](int r) {
                if (auto it = inside.find(r); it != inside.end())
                    return it->second;
                const Box &b = region_box[static_cast<std::size_t>(r)];
                bool in = b.x0 >= hull_box.x0 && b.x1 <= hull_box.x1 && b.y0 >= hull_box.y0 && b.y1 <= hull_box.y1;
                for (int y = b.y0; in && y <= b.y1; ++y)
                    for (int x = b.x0; in && x <= b.x1; ++x)
                        if (regions.labels(y, x) == r && !hull_contains(hull, {x, y}))
                            in = false;
                inside[r] = in;
                return in;
            };

            std::map<int, long> contact;
            for (const Pixel &p : pixels)
                for (const auto &[dx, dy] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}})
                {
                    const int nx = p.x + dx, ny = p.y + dy;
                    if (!in_bounds(img, nx, ny))
                        continue;
                    const int r = regions.labels(ny, nx);
                    if (r == 0)
                        continue;
                    if (region_inside(r))
                        absorbed[static_cast<std::size_t>(r)] = 1;
                    else
                        ++contact[r];
                }
            int best = 0;
            long best_count = 0;
            for (const auto &[r, count] : contact)
                if (reportable[static_cast<std::size_t>(r)] && count > best_count)
                    best = r, best_count = count;
            if (best)
                damages.push_back({std::move(hull), area, best});
        }

        DamageReport report;
        std::map<int, std::size_t> slot;
        for (int r = 1; r <= regions.count; ++r)
        {
            if (!reportable[static_cast<std::size_t>(r)] || absorbed[static_cast<std::size_t>(r)])
                continue;
            slot[r] = report.regions.size();
            RegionDamage entry;
            entry.region_id = r;
            entry.region_area = regions.areas[static_cast<std::size_t>(r - 1)];
            report.regions.push_back(std::move(entry));
        }
        if (report.regions.empty())
            throw EmptyRegions("no region is large enough to assess");

        for (Damage &d : damages)
        {
            const auto it = slot.find(d.region);
            if (it == slot.end())
                continue;
            RegionDamage &entry = report.regions[it->second];
            entry.damaged_area += d.area;
            entry.hulls.push_back(std::move(d.hull));
        }

        for (RegionDamage &entry : report.regions)
        {
            if (entry.hulls.empty())
                continue;
            // The region grows by every hull pixel it does not already own.
            Box all;
            for (const PixelList &hull : entry.hulls)
                for (const Pixel &p : hull)
                    all.add(p);
            long extra = 0;
            for (int y = std::max(all.y0, 0); y <= std::min(all.y1, h - 1); ++y)
                for (int x = std::max(all.x0, 0); x <= std::min(all.x1, w - 1); ++x)
                {
                    if (regions.labels(y, x) == entry.region_id)
                        continue;
                    for (const PixelList &hull : entry.hulls)
                        if (hull_contains(hull, {x, y}))
                        {
                            ++extra;
                            break;
                        }
                }
            entry.region_area += extra;
        }
        for (RegionDamage &entry : report.regions)
        {
            entry.fraction = std::min(1.0, entry.damaged_area / static_cast<double>(entry.region_area));
            entry.action = classify_damage(entry.fraction);
        }
        return report;
    }

    PipelineResult run_pipeline(const GrayImage &img, const PipelineConfig &cfg, std::uint64_t seed)
    {
        validate(cfg);
        PipelineResult out;
        out.edges = detect_bayes(img, cfg.detection, seed).mask;
        out.closed = close_edges(out.edges);
        const int w = width(img), h = height(img);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                if (x < cfg.frame_width || y < cfg.frame_width || x >= w - cfg.frame_width || y >= h - cfg.frame_width)
                    out.closed(y, x) = 1;
        out.regions = segment_regions(out.closed);
        out.report = extract_damage(img, out.closed, out.regions, cfg);
        return out;
    }

    void write_damage_csv(std::ostream &os, const DamageReport &report)
    {
        os << "region_id,region_area,damaged_area,fraction,action\n";
        for (const RegionDamage &r : report.regions)
            os << fmt::format("{},{},{:.12g},{:.12g},{}\n", r.region_id, r.region_area, r.damaged_area, r.fraction,
                              to_string(r.action));
    }

    GrayImage damage_overlay(const GrayImage &img, const DamageReport &report)
    {
        GrayImage out = img;
        for (const RegionDamage &r : report.regions)
            for (const PixelList &hull : r.hulls)
                for (std::size_t i = 0; i < hull.size(); ++i)
                    draw_line(out, hull[i], hull[(i + 1) % hull.size()]);
        return out;
    }
} // namespace bayesedge
