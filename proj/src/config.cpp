#include "uwbdfl/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <numbers>
#include <sstream>

namespace uwbdfl {

namespace {

// ---------------------------------------------------------------------------
// Key schema, used for unknown-key detection and suggestions.

struct Schema {
    enum class Kind { leaf, map, list };
    Kind kind = Kind::leaf;
    std::map<std::string, Schema> fields;
    std::shared_ptr<Schema> item;
};

Schema leaf() { return {}; }

Schema map_of(std::initializer_list<std::pair<const std::string, Schema>> fields)
{
    Schema s;
    s.kind = Schema::Kind::map;
    s.fields = fields;
    return s;
}

Schema list_of(Schema item)
{
    Schema s;
    s.kind = Schema::Kind::list;
    s.item = std::make_shared<Schema>(std::move(item));
    return s;
}

const Schema& root_schema()
{
    static const Schema schema = map_of({
        {"kind", leaf()},
        {"seed", leaf()},
        {"scene_file", leaf()},
        {"pulse", map_of({{"center_freq_hz", leaf()}, {"bandwidth_hz", leaf()}, {"sample_period_ps", leaf()}})},
        {"capture", map_of({{"window_ns", leaf()},
                            {"pretrigger_ns", leaf()},
                            {"clock_jitter_ns", leaf()},
                            {"noise_fraction", leaf()},
                            {"max_order", leaf()},
                            {"rho", leaf()},
                            {"early_window_ns", leaf()},
                            {"gate_energy_ratio", leaf()},
                            {"gate_history", leaf()},
                            {"interference_rate", leaf()}})},
        {"person", map_of({{"radius_m", leaf()}, {"shadow_loss_db", leaf()}})},
        {"scene", map_of({{"bounds", leaf()},
                          {"walls", list_of(map_of({{"from", leaf()},
                                                    {"to", leaf()},
                                                    {"loss_db", leaf()},
                                                    {"reflection", leaf()}}))}})},
        {"energy_gap", map_of({{"tx", leaf()},
                               {"rx_start", leaf()},
                               {"rx_direction", leaf()},
                               {"step_m", leaf()},
                               {"positions", leaf()},
                               {"person", leaf()},
                               {"pdp_bin_ps", leaf()},
                               {"late_window_ns", leaf()}})},
        {"presence", map_of({{"tx", leaf()},
                             {"rx_center", leaf()},
                             {"swing_direction", leaf()},
                             {"swing_half_period_s", leaf()},
                             {"capture_period_s", leaf()},
                             {"walk_speed_mps", leaf()},
                             {"approach_offset_m", leaf()},
                             {"rest_position", leaf()},
                             {"truth_margin_m", leaf()},
                             {"episode_gap_s", leaf()},
                             {"detector", map_of({{"tau", leaf()},
                                                  {"short_len", leaf()},
                                                  {"long_len", leaf()},
                                                  {"event_window", leaf()},
                                                  {"event_count_threshold", leaf()}})},
                             {"variants", list_of(map_of({{"name", leaf()},
                                                          {"displacement_m", leaf()},
                                                          {"duration_s", leaf()},
                                                          {"crossings", list_of(map_of({{"time_s", leaf()},
                                                                                        {"link_fraction", leaf()},
                                                                                        {"angle_deg", leaf()},
                                                                                        {"dwell_s", leaf()}}))}}))}})},
        {"localization", map_of({{"transmitters", leaf()},
                                 {"tracks", list_of(map_of({{"name", leaf()}, {"from", leaf()}, {"to", leaf()}}))},
                                 {"speed_mps", leaf()},
                                 {"capture_period_s", leaf()},
                                 {"position_log_period_s", leaf()},
                                 {"position_noise_m", leaf()},
                                 {"max_spacing_m", leaf()},
                                 {"association_cutoff_m", leaf()},
                                 {"monitored_area", leaf()},
                                 {"standing_positions", leaf()},
                                 {"rti", map_of({{"excess_m", leaf()},
                                                 {"voxel_m", leaf()},
                                                 {"sigma2_m", leaf()},
                                                 {"sigma2_x", leaf()},
                                                 {"correlation_m", leaf()}})}})},
    });
    return schema;
}

int line_of(const YAML::Node& n) { return n.Mark().is_null() ? 0 : n.Mark().line + 1; }

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

void check_keys(const YAML::Node& node, const Schema& schema, const std::string& path, std::vector<ConfigIssue>& issues)
{
    if (schema.kind == Schema::Kind::map) {
        if (!node.IsMap()) {
            if (!node.IsNull()) issues.push_back({path, line_of(node), "expected a section (key: value map)"});
            return;
        }
        for (const auto& kv : node) {
            const auto key = kv.first.as<std::string>();
            const auto it = schema.fields.find(key);
            if (it == schema.fields.end()) {
                std::string best;
                std::size_t best_d = std::string::npos;
                for (const auto& [name, _] : schema.fields) {
                    const std::size_t d = edit_distance(key, name);
                    if (d < best_d) {
                        best_d = d;
                        best = name;
                    }
                }
                std::string msg = "unknown key '" + key + "'";
                if (!best.empty()) msg += "; did you mean '" + best + "'?";
                issues.push_back({join(path, key), line_of(kv.first), msg});
                continue;
            }
            check_keys(kv.second, it->second, join(path, key), issues);
        }
    } else if (schema.kind == Schema::Kind::list) {
        if (!node.IsSequence()) {
            issues.push_back({path, line_of(node), "expected a list"});
            return;
        }
        for (std::size_t i = 0; i < node.size(); ++i)
            check_keys(node[i], *schema.item, path + "." + std::to_string(i), issues);
    }
}

// ---------------------------------------------------------------------------
// Typed field readers. Each records an issue instead of throwing.

class Reader {
public:
    explicit Reader(std::vector<ConfigIssue>& issues) : issues_(issues) {}

    void number(const YAML::Node& parent, const char* key, const std::string& path, double& out, double scale = 1.0)
    {
        const YAML::Node n = parent[key];
        if (!n) return;
        try {
            out = n.as<double>() * scale;
        } catch (const YAML::Exception&) {
            fail(join(path, key), n, "expected a number");
        }
    }

    template <typename Int>
    void integer(const YAML::Node& parent, const char* key, const std::string& path, Int& out)
    {
        const YAML::Node n = parent[key];
        if (!n) return;
        try {
            out = n.as<Int>();
        } catch (const YAML::Exception&) {
            fail(join(path, key), n, "expected an integer");
        }
    }

    void text(const YAML::Node& parent, const char* key, const std::string& path, std::string& out)
    {
        const YAML::Node n = parent[key];
        if (!n) return;
        if (!n.IsScalar()) return fail(join(path, key), n, "expected a string");
        out = n.as<std::string>();
    }

    void point(const YAML::Node& parent, const char* key, const std::string& path, Point2& out)
    {
        const YAML::Node n = parent[key];
        if (!n) return;
        if (auto p = as_point(n, join(path, key))) out = *p;
    }

    void points(const YAML::Node& parent, const char* key, const std::string& path, std::vector<Point2>& out)
    {
        const YAML::Node n = parent[key];
        if (!n) return;
        if (!n.IsSequence()) return fail(join(path, key), n, "expected a list of [x, y] points");
        std::vector<Point2> pts;
        for (std::size_t i = 0; i < n.size(); ++i)
            if (auto p = as_point(n[i], join(path, key) + "." + std::to_string(i))) pts.push_back(*p);
        out = std::move(pts);
    }

    void bounds(const YAML::Node& parent, const char* key, const std::string& path, Bounds& out)
    {
        const YAML::Node n = parent[key];
        if (!n) return;
        const auto v = as_numbers(n, join(path, key), 4, "[xmin, ymin, xmax, ymax]");
        if (v.size() == 4) out = Bounds{v[0], v[1], v[2], v[3]};
    }

    void range(const YAML::Node& parent, const char* key, const std::string& path, double& lo, double& hi,
               double scale)
    {
        const YAML::Node n = parent[key];
        if (!n) return;
        const auto v = as_numbers(n, join(path, key), 2, "[start, end]");
        if (v.size() == 2) {
            lo = v[0] * scale;
            hi = v[1] * scale;
        }
    }

    void fail(const std::string& field, const YAML::Node& n, const std::string& msg)
    {
        issues_.push_back({field, line_of(n), msg});
    }

private:
    std::optional<Point2> as_point(const YAML::Node& n, const std::string& field)
    {
        const auto v = as_numbers(n, field, 2, "[x, y]");
        if (v.size() != 2) return std::nullopt;
        return Point2(v[0], v[1]);
    }

    std::vector<double> as_numbers(const YAML::Node& n, const std::string& field, std::size_t count, const char* shape)
    {
        if (!n.IsSequence() || n.size() != count) {
            fail(field, n, std::string("expected ") + shape);
            return {};
        }
        std::vector<double> v;
        try {
            for (std::size_t i = 0; i < count; ++i) v.push_back(n[i].as<double>());
        } catch (const YAML::Exception&) {
            fail(field, n, std::string("expected numeric ") + shape);
            return {};
        }
        return v;
    }

    std::vector<ConfigIssue>& issues_;
};

void read_walls(Reader& rd, const YAML::Node& scene, std::vector<Wall>& walls)
{
    const YAML::Node list = scene["walls"];
    if (!list || !list.IsSequence()) return;
    walls.clear();
    for (std::size_t i = 0; i < list.size(); ++i) {
        const std::string path = "scene.walls." + std::to_string(i);
        Wall w;
        rd.point(list[i], "from", path, w.segment.a);
        rd.point(list[i], "to", path, w.segment.b);
        rd.number(list[i], "loss_db", path, w.loss_db);
        rd.number(list[i], "reflection", path, w.reflection);
        if (!list[i]["from"] || !list[i]["to"]) rd.fail(path, list[i], "wall needs both 'from' and 'to'");
        walls.push_back(w);
    }
}

void read_document(const YAML::Node& root, ExperimentConfig& cfg, std::vector<ConfigIssue>& issues)
{
    Reader rd(issues);
    rd.integer(root, "seed", "", cfg.seed);

    if (const YAML::Node n = root["pulse"]) {
        rd.number(n, "center_freq_hz", "pulse", cfg.pulse.center_freq);
        rd.number(n, "bandwidth_hz", "pulse", cfg.pulse.bandwidth);
        rd.number(n, "sample_period_ps", "pulse", cfg.pulse.sample_period, 1e-12);
    }
    if (const YAML::Node n = root["capture"]) {
        auto& c = cfg.capture;
        rd.number(n, "window_ns", "capture", c.window, 1e-9);
        rd.number(n, "pretrigger_ns", "capture", c.pretrigger, 1e-9);
        rd.number(n, "clock_jitter_ns", "capture", c.clock_jitter, 1e-9);
        rd.number(n, "noise_fraction", "capture", c.noise_fraction);
        rd.integer(n, "max_order", "capture", c.max_order);
        rd.number(n, "rho", "capture", c.rho);
        rd.number(n, "early_window_ns", "capture", c.early_window, 1e-9);
        rd.number(n, "gate_energy_ratio", "capture", c.gate_energy_ratio);
        rd.integer(n, "gate_history", "capture", c.gate_history);
        rd.number(n, "interference_rate", "capture", c.interference_rate);
    }
    if (const YAML::Node n = root["person"]) {
        rd.number(n, "radius_m", "person", cfg.person.radius);
        rd.number(n, "shadow_loss_db", "person", cfg.person.shadow_loss_db);
    }
    if (const YAML::Node n = root["scene"]) {
        rd.bounds(n, "bounds", "scene", cfg.scene.bounds);
        read_walls(rd, n, cfg.scene.walls);
    }
    if (const YAML::Node n = root["energy_gap"]) {
        auto& e = cfg.energy_gap;
        rd.point(n, "tx", "energy_gap", e.tx);
        rd.point(n, "rx_start", "energy_gap", e.rx_start);
        rd.point(n, "rx_direction", "energy_gap", e.rx_direction);
        rd.number(n, "step_m", "energy_gap", e.step);
        rd.integer(n, "positions", "energy_gap", e.positions);
        rd.point(n, "person", "energy_gap", e.person);
        rd.number(n, "pdp_bin_ps", "energy_gap", e.pdp_bin, 1e-12);
        rd.range(n, "late_window_ns", "energy_gap", e.late_start, e.late_end, 1e-9);
    }
    if (const YAML::Node n = root["presence"]) {
        auto& p = cfg.presence;
        rd.point(n, "tx", "presence", p.tx);
        rd.point(n, "rx_center", "presence", p.rx_center);
        rd.point(n, "swing_direction", "presence", p.swing_direction);
        rd.number(n, "swing_half_period_s", "presence", p.swing_half_period);
        rd.number(n, "capture_period_s", "presence", p.capture_period);
        rd.number(n, "walk_speed_mps", "presence", p.walk_speed);
        rd.number(n, "approach_offset_m", "presence", p.approach_offset);
        rd.point(n, "rest_position", "presence", p.rest_position);
        rd.number(n, "truth_margin_m", "presence", p.truth_margin);
        rd.number(n, "episode_gap_s", "presence", p.episode_gap);
        if (const YAML::Node d = n["detector"]) {
            rd.number(d, "tau", "presence.detector", p.detector.tau);
            rd.integer(d, "short_len", "presence.detector", p.detector.short_len);
            rd.integer(d, "long_len", "presence.detector", p.detector.long_len);
            rd.integer(d, "event_window", "presence.detector", p.detector.event_window);
            rd.integer(d, "event_count_threshold", "presence.detector", p.detector.event_count_threshold);
        }
        if (const YAML::Node vs = n["variants"]; vs && vs.IsSequence()) {
            p.variants.clear();
            for (std::size_t i = 0; i < vs.size(); ++i) {
                const std::string path = "presence.variants." + std::to_string(i);
                PresenceVariant v;
                v.name = "variant" + std::to_string(i + 1);
                rd.text(vs[i], "name", path, v.name);
                rd.number(vs[i], "displacement_m", path, v.displacement);
                rd.number(vs[i], "duration_s", path, v.duration);
                if (const YAML::Node cs = vs[i]["crossings"]; cs && cs.IsSequence()) {
                    for (std::size_t k = 0; k < cs.size(); ++k) {
                        const std::string cpath = path + ".crossings." + std::to_string(k);
                        Crossing c;
                        rd.number(cs[k], "time_s", cpath, c.time);
                        rd.number(cs[k], "link_fraction", cpath, c.link_fraction);
                        rd.number(cs[k], "angle_deg", cpath, c.angle_deg);
                        rd.number(cs[k], "dwell_s", cpath, c.dwell);
                        if (!cs[k]["time_s"]) rd.fail(cpath, cs[k], "crossing needs 'time_s'");
                        v.crossings.push_back(c);
                    }
                }
                p.variants.push_back(std::move(v));
            }
        }
    }
    if (const YAML::Node n = root["localization"]) {
        auto& l = cfg.localization;
        rd.points(n, "transmitters", "localization", l.transmitters);
        if (const YAML::Node ts = n["tracks"]; ts && ts.IsSequence()) {
            l.tracks.clear();
            for (std::size_t i = 0; i < ts.size(); ++i) {
                const std::string path = "localization.tracks." + std::to_string(i);
                TrackConfig t;
                t.name = "track" + std::to_string(i + 1);
                rd.text(ts[i], "name", path, t.name);
                rd.point(ts[i], "from", path, t.from);
                rd.point(ts[i], "to", path, t.to);
                l.tracks.push_back(std::move(t));
            }
        }
        rd.number(n, "speed_mps", "localization", l.speed);
        rd.number(n, "capture_period_s", "localization", l.capture_period);
        rd.number(n, "position_log_period_s", "localization", l.position_log_period);
        rd.number(n, "position_noise_m", "localization", l.position_noise);
        rd.number(n, "max_spacing_m", "localization", l.max_spacing);
        rd.number(n, "association_cutoff_m", "localization", l.association_cutoff);
        rd.bounds(n, "monitored_area", "localization", l.monitored_area);
        rd.points(n, "standing_positions", "localization", l.standing_positions);
        if (const YAML::Node r = n["rti"]) {
            rd.number(r, "excess_m", "localization.rti", l.rti.excess);
            rd.number(r, "voxel_m", "localization.rti", l.rti.voxel_size);
            rd.number(r, "sigma2_m", "localization.rti", l.rti.sigma2_m);
            rd.number(r, "sigma2_x", "localization.rti", l.rti.sigma2_x);
            rd.number(r, "correlation_m", "localization.rti", l.rti.correlation);
        }
    }
}

// Dotted-path override, e.g. "presence.detector.tau=0.02" or
// "localization.standing_positions.0=[1, 2]". A list absent from the file is
// first copied from `defaults` so that its elements can be indexed.
void apply_override(YAML::Node root, const std::string& spec, const YAML::Node& defaults,
                    std::vector<ConfigIssue>& issues)
{
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0) {
        issues.push_back({spec, 0, "override must have the form KEY=VALUE"});
        return;
    }
    const std::string key = spec.substr(0, eq);
    const std::string value = spec.substr(eq + 1);

    std::vector<std::string> parts;
    std::stringstream ss(key);
    for (std::string part; std::getline(ss, part, '.');) parts.push_back(part);

    YAML::Node value_node;
    try {
        value_node = YAML::Load(value);
    } catch (const YAML::Exception& e) {
        issues.push_back({key, 0, "override value does not parse: " + std::string(e.what())});
        return;
    }

    // yaml-cpp nodes are handles; walk down by rebinding through a stack.
    std::vector<YAML::Node> stack{root};
    YAML::Node def;
    def.reset(defaults);
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        YAML::Node cur = stack.back();
        // Node assignment copies values; reset() rebinds the handle.
        if (def && def.IsMap())
            def.reset(def[parts[i]]);
        else if (def && def.IsSequence() && std::isdigit(static_cast<unsigned char>(parts[i][0])) &&
                 std::stoul(parts[i]) < def.size())
            def.reset(def[std::stoul(parts[i])]);
        else
            def.reset();
        const std::string& p = parts[i];
        if (cur.IsSequence()) {
            std::size_t idx = 0;
            try {
                idx = std::stoul(p);
            } catch (const std::exception&) {
                issues.push_back({key, 0, "override path element '" + p + "' must be a list index"});
                return;
            }
            if (idx >= cur.size()) {
                issues.push_back({key, 0, "override list index " + p + " out of range"});
                return;
            }
            stack.push_back(cur[idx]);
        } else {
            if (!cur[p] || cur[p].IsNull())
                cur[p] = def && def.IsSequence() ? YAML::Clone(def) : YAML::Node(YAML::NodeType::Map);
            stack.push_back(cur[p]);
        }
    }
    YAML::Node parent = stack.back();
    const std::string& leaf_key = parts.back();
    if (parent.IsSequence()) {
        std::size_t idx = 0;
        try {
            idx = std::stoul(leaf_key);
        } catch (const std::exception&) {
            issues.push_back({key, 0, "override path element '" + leaf_key + "' must be a list index"});
            return;
        }
        if (idx >= parent.size()) {
            issues.push_back({key, 0, "override list index out of range"});
            return;
        }
        parent[idx] = value_node;
    } else {
        parent[leaf_key] = value_node;
    }
}

// ---------------------------------------------------------------------------
// Built-in scenes.

Wall wall(double x0, double y0, double x1, double y1, double loss_db, double reflection)
{
    return Wall{Segment{Point2(x0, y0), Point2(x1, y1)}, loss_db, reflection};
}

void add_rect(std::vector<Wall>& walls, double x0, double y0, double x1, double y1, double loss, double refl)
{
    walls.push_back(wall(x0, y0, x1, y0, loss, refl));
    walls.push_back(wall(x1, y0, x1, y1, loss, refl));
    walls.push_back(wall(x1, y1, x0, y1, loss, refl));
    walls.push_back(wall(x0, y1, x0, y0, loss, refl));
}

// Three side-by-side rooms; the link runs from the west office through the
// empty middle room into the east office.
void energy_gap_defaults(ExperimentConfig& c)
{
    c.scene.bounds = Bounds{-3.5, -0.5, 7.5, 5.5};
    auto& w = c.scene.walls;
    add_rect(w, -3.0, 0.0, 7.0, 5.0, 6.0, 0.6);
    w.push_back(wall(0.0, 0.0, 0.0, 5.0, 3.0, 0.4));
    w.push_back(wall(4.0, 0.0, 4.0, 5.0, 3.0, 0.4));
    w.push_back(wall(-2.5, 4.2, -1.2, 4.2, 1.0, 0.5));
    w.push_back(wall(-2.6, 0.6, -2.6, 1.6, 1.0, 0.5));
    w.push_back(wall(5.4, 0.7, 6.6, 0.7, 1.0, 0.5));
    w.push_back(wall(6.4, 3.4, 6.4, 4.6, 1.0, 0.5));
    w.push_back(wall(0.8, 4.3, 2.4, 4.3, 1.0, 0.5));
    w.push_back(wall(3.3, 0.4, 3.3, 1.3, 1.0, 0.5));

    auto& e = c.energy_gap;
    e.tx = Point2(-1.0, 2.5);
    e.rx_start = Point2(5.0, 2.41);
    e.rx_direction = Point2(0.0, 1.0);
    e.person = Point2(2.0, 2.5);
}

// Cluttered office with the link crossing two of its walls.
void presence_defaults(ExperimentConfig& c)
{
    c.scene.bounds = Bounds{-2.5, -2.0, 7.5, 6.0};
    auto& w = c.scene.walls;
    add_rect(w, -2.0, -1.5, 7.0, 5.5, 6.0, 0.6);
    add_rect(w, 0.0, 0.0, 5.0, 4.0, 3.0, 0.4);
    w.push_back(wall(0.5, 3.4, 1.9, 3.4, 1.0, 0.5));
    w.push_back(wall(3.0, 0.6, 4.3, 0.6, 1.0, 0.5));
    w.push_back(wall(2.2, 3.5, 3.4, 3.5, 1.0, 0.5));
    w.push_back(wall(4.7, 2.9, 4.7, 3.8, 1.0, 0.5));
    w.push_back(wall(0.3, 0.4, 0.3, 1.3, 1.0, 0.5));
    w.push_back(wall(1.3, 0.8, 1.7, 0.8, 1.0, 0.5));

    auto& p = c.presence;
    p.tx = Point2(-0.8, 2.0);
    p.rx_center = Point2(5.8, 2.0);
    p.swing_direction = Point2(0.0, 1.0);
    p.rest_position = Point2(2.5, 3.0);

    PresenceVariant near;
    near.name = "swing_0.10m";
    near.displacement = 0.10;
    near.duration = 155.0;
    const double fr1[] = {0.30, 0.55, 0.42, 0.68, 0.36, 0.60, 0.47, 0.72, 0.50};
    const double an1[] = {40, 55, 35, 50, 45, 60, 38, 52, 90};
    for (int k = 0; k < 9; ++k)
        near.crossings.push_back(Crossing{20.0 + 15.0 * k, fr1[k], an1[k], k == 8 ? 2.0 : 0.0});

    PresenceVariant far;
    far.name = "swing_0.20m";
    far.displacement = 0.20;
    far.duration = 110.0;
    const double fr2[] = {0.33, 0.58, 0.45, 0.66, 0.40, 0.52};
    const double an2[] = {45, 50, 40, 55, 42, 48};
    for (int k = 0; k < 6; ++k) far.crossings.push_back(Crossing{20.0 + 15.0 * k, fr2[k], an2[k], 0.0});

    p.variants = {near, far};
}

// Brick classroom with a hall to the south and a second room to the east; the
// receiver tracks run along both, transmitters sit west and north.
void localization_defaults(ExperimentConfig& c)
{
    c.capture.window = 40e-9;
    c.scene.bounds = Bounds{-2.0, -2.0, 7.0, 6.5};
    auto& w = c.scene.walls;
    add_rect(w, -1.5, -1.4, 6.5, 5.8, 6.0, 0.6);
    add_rect(w, 0.0, 0.0, 4.0, 4.4, 4.0, 0.5);
    w.push_back(wall(4.0, 0.0, 6.5, 0.0, 3.0, 0.4));
    w.push_back(wall(4.0, 4.4, 6.5, 4.4, 3.0, 0.4));
    w.push_back(wall(2.8, 3.8, 3.6, 3.8, 1.0, 0.4));
    w.push_back(wall(0.6, 0.6, 1.2, 0.6, 1.0, 0.4));

    auto& l = c.localization;
    l.transmitters = {Point2(-0.7, 1.0), Point2(-0.7, 3.4), Point2(0.9, 5.1), Point2(3.0, 5.1)};
    l.tracks = {TrackConfig{"room", Point2(4.6, 0.5), Point2(4.6, 3.9)},
                TrackConfig{"hall", Point2(-0.1, -0.6), Point2(4.15, -0.6)}};
    l.monitored_area = Bounds{0.0, 0.0, 4.0, 4.4};
    l.standing_positions = {Point2(1.1, 3.0), Point2(2.7, 3.1), Point2(1.4, 1.4), Point2(2.8, 1.5)};
    // With 1/A_l weights and dB-valued y, sigma2_M = 0.1 lets single-link
    // streaks dominate the image; 10..100 is the stable range for this scene.
    l.rti.sigma2_m = 30.0;
}

bool finite_point(const Point2& p) { return p.allFinite(); }

// Line of the node at a dotted path, 0 when the path is absent (a default).
int line_of_field(const YAML::Node& root, const std::string& field)
{
    std::vector<YAML::Node> stack{root};
    std::stringstream ss(field);
    for (std::string part; std::getline(ss, part, '.');) {
        const YAML::Node cur = stack.back();
        YAML::Node next;
        if (cur.IsSequence()) {
            const std::size_t idx = std::strtoul(part.c_str(), nullptr, 10);
            if (idx >= cur.size()) return 0;
            next = cur[idx];
        } else if (cur.IsMap()) {
            next = cur[part];
        }
        if (!next) return 0;
        stack.push_back(next);
    }
    return line_of(stack.back());
}

}  // namespace

std::string to_string(ExperimentKind kind)
{
    switch (kind) {
    case ExperimentKind::energy_gap: return "energy_gap";
    case ExperimentKind::presence: return "presence";
    case ExperimentKind::localization: return "localization";
    }
    return "unknown";
}

std::optional<ExperimentKind> parse_kind(const std::string& text)
{
    if (text == "energy_gap") return ExperimentKind::energy_gap;
    if (text == "presence") return ExperimentKind::presence;
    if (text == "localization") return ExperimentKind::localization;
    return std::nullopt;
}

namespace {

std::string format_issues(const std::vector<ConfigIssue>& issues)
{
    std::ostringstream os;
    os << issues.size() << " configuration error" << (issues.size() == 1 ? "" : "s") << ':';
    for (const auto& i : issues) {
        os << "\n  " << (i.field.empty() ? "<root>" : i.field);
        if (i.line > 0) os << " (line " << i.line << ")";
        os << ": " << i.message;
    }
    return os.str();
}

}  // namespace

ConfigError::ConfigError(std::vector<ConfigIssue> issues)
    : std::runtime_error(format_issues(issues)), issues_(std::move(issues))
{
}

std::size_t edit_distance(const std::string& a, const std::string& b)
{
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j)
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

ExperimentConfig default_config(ExperimentKind kind)
{
    ExperimentConfig c;
    c.kind = kind;
    switch (kind) {
    case ExperimentKind::energy_gap: energy_gap_defaults(c); break;
    case ExperimentKind::presence: presence_defaults(c); break;
    case ExperimentKind::localization: localization_defaults(c); break;
    }
    return c;
}

std::vector<ConfigIssue> check_config(const ExperimentConfig& c)
{
    std::vector<ConfigIssue> out;
    auto need = [&out](bool ok, const std::string& field, const std::string& msg) {
        if (!ok) out.push_back({field, 0, msg});
    };

    need(c.pulse.sample_period > 0.0, "pulse.sample_period_ps", "must be > 0");
    need(c.pulse.bandwidth > 0.0, "pulse.bandwidth_hz", "must be > 0");
    need(c.pulse.center_freq - c.pulse.bandwidth / 2.0 > 0.0, "pulse.center_freq_hz",
         "lower band edge center - bandwidth/2 must be > 0");
    if (c.pulse.sample_period > 0.0)
        need(1.0 / (2.0 * c.pulse.sample_period) >= c.pulse.center_freq + c.pulse.bandwidth / 2.0,
             "pulse.sample_period_ps", "sample rate is below Nyquist for the pulse band");

    const auto& cap = c.capture;
    need(cap.window > 0.0, "capture.window_ns", "must be > 0");
    need(cap.pretrigger > 0.0, "capture.pretrigger_ns", "must be > 0");
    need(cap.clock_jitter >= 0.0 && cap.clock_jitter < cap.pretrigger, "capture.clock_jitter_ns",
         "must be >= 0 and below the pretrigger");
    need(cap.window > cap.pretrigger + cap.early_window + 2e-9, "capture.window_ns",
         "must exceed pretrigger + early window + one pulse length");
    need(cap.noise_fraction >= 0.0, "capture.noise_fraction", "must be >= 0");
    need(cap.max_order >= 0 && cap.max_order <= 6, "capture.max_order", "must be in [0, 6]");
    need(cap.rho > 0.0 && cap.rho < 1.0, "capture.rho", "must be in (0, 1)");
    need(cap.early_window > 0.0, "capture.early_window_ns", "must be > 0");
    need(cap.gate_energy_ratio > 1.0, "capture.gate_energy_ratio", "must be > 1");
    need(cap.gate_history > 0, "capture.gate_history", "must be > 0");
    need(cap.interference_rate >= 0.0 && cap.interference_rate < 1.0, "capture.interference_rate",
         "must be in [0, 1)");

    need(c.person.radius > 0.0, "person.radius_m", "must be > 0");
    need(c.person.shadow_loss_db >= 0.0, "person.shadow_loss_db", "must be >= 0");

    need(c.scene.bounds.width() > 0.0 && c.scene.bounds.height() > 0.0, "scene.bounds", "must have positive extent");
    for (std::size_t i = 0; i < c.scene.walls.size(); ++i) {
        const auto& w = c.scene.walls[i];
        const std::string f = "scene.walls." + std::to_string(i);
        need(w.loss_db >= 0.0, f + ".loss_db", "must be >= 0");
        need(w.reflection >= 0.0 && w.reflection <= 1.0, f + ".reflection", "must be in [0, 1]");
        need(w.segment.length() > 0.0, f, "wall endpoints must differ");
    }
    const Bounds& sb = c.scene.bounds;

    if (c.kind == ExperimentKind::energy_gap) {
        const auto& e = c.energy_gap;
        need(sb.contains(e.tx), "energy_gap.tx", "must lie inside scene bounds");
        need(sb.contains(e.rx_start), "energy_gap.rx_start", "must lie inside scene bounds");
        need(e.rx_direction.norm() > 0.0, "energy_gap.rx_direction", "must be non-zero");
        need(e.step > 0.0, "energy_gap.step_m", "must be > 0");
        need(e.positions > 0, "energy_gap.positions", "must be > 0");
        need(sb.contains(e.person), "energy_gap.person", "must lie inside scene bounds");
        need(e.pdp_bin >= c.pulse.sample_period, "energy_gap.pdp_bin_ps", "must be >= the sample period");
        need(e.late_start >= 0.0 && e.late_end > e.late_start, "energy_gap.late_window_ns", "needs 0 <= start < end");
        need(e.late_end <= cap.window - cap.pretrigger - cap.clock_jitter, "energy_gap.late_window_ns",
             "late window extends past the capture window");
    }

    if (c.kind == ExperimentKind::presence) {
        const auto& p = c.presence;
        need(sb.contains(p.tx), "presence.tx", "must lie inside scene bounds");
        need(sb.contains(p.rx_center), "presence.rx_center", "must lie inside scene bounds");
        need((p.tx - p.rx_center).norm() > 0.0, "presence.rx_center", "must differ from tx");
        need(p.swing_direction.norm() > 0.0, "presence.swing_direction", "must be non-zero");
        need(p.swing_half_period > 0.0, "presence.swing_half_period_s", "must be > 0");
        need(p.capture_period > 0.0, "presence.capture_period_s", "must be > 0");
        need(p.walk_speed > 0.0, "presence.walk_speed_mps", "must be > 0");
        need(p.approach_offset > c.person.radius, "presence.approach_offset_m", "must exceed the person radius");
        need(sb.contains(p.rest_position), "presence.rest_position", "must lie inside scene bounds");
        need(p.truth_margin >= c.person.radius, "presence.truth_margin_m", "must be >= the person radius");
        need(p.episode_gap >= 0.0, "presence.episode_gap_s", "must be >= 0");
        try {
            p.detector.validate();
        } catch (const std::exception& ex) {
            out.push_back({"presence.detector", 0, ex.what()});
        }
        need(!p.variants.empty(), "presence.variants", "at least one variant is required");
        for (std::size_t i = 0; i < p.variants.size(); ++i) {
            const auto& v = p.variants[i];
            const std::string f = "presence.variants." + std::to_string(i);
            need(v.displacement >= 0.0, f + ".displacement_m", "must be >= 0");
            need(v.duration > 0.0, f + ".duration_s", "must be > 0");
            for (std::size_t k = 0; k < v.crossings.size(); ++k) {
                const auto& x = v.crossings[k];
                const std::string cf = f + ".crossings." + std::to_string(k);
                need(x.time >= 0.0 && x.time <= v.duration, cf + ".time_s", "must lie within the variant duration");
                need(x.link_fraction > 0.0 && x.link_fraction < 1.0, cf + ".link_fraction", "must be in (0, 1)");
                need(x.angle_deg >= 10.0 && x.angle_deg <= 170.0, cf + ".angle_deg", "must be in [10, 170]");
                need(x.dwell >= 0.0, cf + ".dwell_s", "must be >= 0");
                if (k > 0) need(x.time > v.crossings[k - 1].time, cf + ".time_s", "crossing times must increase");
                // The oblique approach starts approach_offset / sin(angle) before the line.
                auto pass = [&p](const Crossing& c) {
                    return p.approach_offset / std::sin(c.angle_deg * std::numbers::pi / 180.0) / p.walk_speed;
                };
                if (p.walk_speed > 0.0 && x.angle_deg >= 10.0 && x.angle_deg <= 170.0) {
                    const double start = x.time - pass(x);
                    const double prev_end =
                        k == 0 ? 0.0 : v.crossings[k - 1].time + v.crossings[k - 1].dwell + pass(v.crossings[k - 1]);
                    need(start > prev_end, cf + ".time_s",
                         k == 0 ? "approach would start before t = 0" : "approach overlaps the previous crossing");
                }
            }
        }
    }

    if (c.kind == ExperimentKind::localization) {
        const auto& l = c.localization;
        need(!l.transmitters.empty(), "localization.transmitters", "at least one transmitter is required");
        for (std::size_t i = 0; i < l.transmitters.size(); ++i)
            need(finite_point(l.transmitters[i]) && sb.contains(l.transmitters[i]),
                 "localization.transmitters." + std::to_string(i), "must lie inside scene bounds");
        need(!l.tracks.empty(), "localization.tracks", "at least one receiver track is required");
        for (std::size_t i = 0; i < l.tracks.size(); ++i) {
            const auto& t = l.tracks[i];
            const std::string f = "localization.tracks." + std::to_string(i);
            need((t.to - t.from).norm() > 0.0, f, "track endpoints must differ");
            need(sb.contains(t.from) && sb.contains(t.to), f, "track must lie inside scene bounds");
        }
        need(l.speed > 0.0, "localization.speed_mps", "must be > 0");
        need(l.capture_period > 0.0, "localization.capture_period_s", "must be > 0");
        need(l.position_log_period > 0.0, "localization.position_log_period_s", "must be > 0");
        need(l.position_noise >= 0.0, "localization.position_noise_m", "must be >= 0");
        need(l.max_spacing > 0.0, "localization.max_spacing_m", "must be > 0");
        need(l.association_cutoff >= 0.0, "localization.association_cutoff_m", "must be >= 0");
        need(l.monitored_area.width() > 0.0 && l.monitored_area.height() > 0.0, "localization.monitored_area",
             "must have positive extent");
        for (std::size_t i = 0; i < l.standing_positions.size(); ++i)
            need(sb.contains(l.standing_positions[i]), "localization.standing_positions." + std::to_string(i),
                 "must lie inside scene bounds");
        need(l.rti.excess > 0.0, "localization.rti.excess_m", "must be > 0");
        need(l.rti.voxel_size > 0.0, "localization.rti.voxel_m", "must be > 0");
        need(l.rti.sigma2_m >= 0.0, "localization.rti.sigma2_m", "must be >= 0");
        need(l.rti.sigma2_x > 0.0, "localization.rti.sigma2_x", "must be > 0");
        need(l.rti.correlation > 0.0, "localization.rti.correlation_m", "must be > 0");
    }
    return out;
}

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& origin,
                              const std::vector<std::string>& overrides)
{
    std::vector<ConfigIssue> issues;
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError({{"", e.mark.line + 1, "parse error: " + e.msg}});
    }
    if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
    if (!root.IsMap()) throw ConfigError({{"", line_of(root), "top level must be a key: value map"}});

    YAML::Node defaults;
    if (!overrides.empty()) {
        // Kind may itself be overridden; the last assignment wins.
        std::string kind_text = root["kind"] && root["kind"].IsScalar() ? root["kind"].as<std::string>() : "";
        for (const auto& o : overrides)
            if (o.starts_with("kind=")) kind_text = o.substr(5);
        if (const auto k = parse_kind(kind_text)) defaults = YAML::Load(dump_config(default_config(*k)));
    }
    for (const auto& o : overrides) apply_override(root, o, defaults, issues);

    std::filesystem::path scene_file;
    if (const YAML::Node sf = root["scene_file"]) {
        scene_file = sf.as<std::string>();
        if (scene_file.is_relative() && !origin.empty()) scene_file = origin.parent_path() / scene_file;
        if (root["scene"]) {
            issues.push_back({"scene_file", line_of(sf), "give either 'scene' or 'scene_file', not both"});
        } else if (!std::filesystem::exists(scene_file)) {
            issues.push_back({"scene_file", line_of(sf), "file not found: " + scene_file.string()});
        } else {
            try {
                root["scene"] = YAML::LoadFile(scene_file.string());
            } catch (const YAML::ParserException& e) {
                issues.push_back({"scene_file", e.mark.line + 1, scene_file.string() + ": parse error: " + e.msg});
            }
        }
    }

    check_keys(root, root_schema(), "", issues);

    const YAML::Node kind_node = root["kind"];
    std::optional<ExperimentKind> kind;
    if (!kind_node) {
        issues.push_back({"kind", 0, "missing required key 'kind' (energy_gap | presence | localization)"});
    } else if (!(kind = parse_kind(kind_node.IsScalar() ? kind_node.as<std::string>() : std::string()))) {
        issues.push_back({"kind", line_of(kind_node), "must be one of energy_gap, presence, localization"});
    }
    if (!kind) throw ConfigError(std::move(issues));

    ExperimentConfig cfg = default_config(*kind);
    cfg.source = origin;
    cfg.scene_file = scene_file;
    cfg.overrides = overrides;
    read_document(root, cfg, issues);
    for (auto& issue : check_config(cfg)) {
        issue.line = line_of_field(root, issue.field);
        issues.push_back(std::move(issue));
    }
    if (!issues.empty()) {
        // Override values carry no position in the file.
        for (auto& issue : issues)
            for (const auto& o : overrides) {
                const std::string key = o.substr(0, o.find('='));
                const bool under = issue.field == key || issue.field.starts_with(key + ".") ||
                                   key.starts_with(issue.field + ".");
                if (under && !issue.field.empty() && !issue.message.starts_with("override")) {
                    issue.line = 0;
                    issue.message += " (set by --override " + key + ")";
                    break;
                }
            }
        throw ConfigError(std::move(issues));
    }
    return cfg;
}

ExperimentConfig validate_config(const std::filesystem::path& path, const std::vector<std::string>& overrides)
{
    std::ifstream in(path);
    if (!in) throw ConfigError({{"", 0, "cannot read config file " + path.string()}});
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path, overrides);
}

namespace {

void emit_point(YAML::Emitter& out, const Point2& p)
{
    out << YAML::Flow << YAML::BeginSeq << p.x() << p.y() << YAML::EndSeq;
}

void emit_bounds(YAML::Emitter& out, const Bounds& b)
{
    out << YAML::Flow << YAML::BeginSeq << b.xmin << b.ymin << b.xmax << b.ymax << YAML::EndSeq;
}

}  // namespace

std::string dump_config(const ExperimentConfig& c)
{
    YAML::Emitter out;
    out.SetDoublePrecision(10);
    out << YAML::BeginMap;
    out << YAML::Key << "kind" << YAML::Value << to_string(c.kind);
    out << YAML::Key << "seed" << YAML::Value << c.seed;

    out << YAML::Key << "pulse" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "center_freq_hz" << YAML::Value << c.pulse.center_freq;
    out << YAML::Key << "bandwidth_hz" << YAML::Value << c.pulse.bandwidth;
    out << YAML::Key << "sample_period_ps" << YAML::Value << c.pulse.sample_period * 1e12;
    out << YAML::EndMap;

    const auto& cap = c.capture;
    out << YAML::Key << "capture" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "window_ns" << YAML::Value << cap.window * 1e9;
    out << YAML::Key << "pretrigger_ns" << YAML::Value << cap.pretrigger * 1e9;
    out << YAML::Key << "clock_jitter_ns" << YAML::Value << cap.clock_jitter * 1e9;
    out << YAML::Key << "noise_fraction" << YAML::Value << cap.noise_fraction;
    out << YAML::Key << "max_order" << YAML::Value << cap.max_order;
    out << YAML::Key << "rho" << YAML::Value << cap.rho;
    out << YAML::Key << "early_window_ns" << YAML::Value << cap.early_window * 1e9;
    out << YAML::Key << "gate_energy_ratio" << YAML::Value << cap.gate_energy_ratio;
    out << YAML::Key << "gate_history" << YAML::Value << cap.gate_history;
    out << YAML::Key << "interference_rate" << YAML::Value << cap.interference_rate;
    out << YAML::EndMap;

    out << YAML::Key << "person" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "radius_m" << YAML::Value << c.person.radius;
    out << YAML::Key << "shadow_loss_db" << YAML::Value << c.person.shadow_loss_db;
    out << YAML::EndMap;

    out << YAML::Key << "scene" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "bounds" << YAML::Value;
    emit_bounds(out, c.scene.bounds);
    out << YAML::Key << "walls" << YAML::Value << YAML::BeginSeq;
    for (const auto& w : c.scene.walls) {
        out << YAML::Flow << YAML::BeginMap;
        out << YAML::Key << "from" << YAML::Value;
        emit_point(out, w.segment.a);
        out << YAML::Key << "to" << YAML::Value;
        emit_point(out, w.segment.b);
        out << YAML::Key << "loss_db" << YAML::Value << w.loss_db;
        out << YAML::Key << "reflection" << YAML::Value << w.reflection;
        out << YAML::EndMap;
    }
    out << YAML::EndSeq << YAML::EndMap;

    if (c.kind == ExperimentKind::energy_gap) {
        const auto& e = c.energy_gap;
        out << YAML::Key << "energy_gap" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "tx" << YAML::Value;
        emit_point(out, e.tx);
        out << YAML::Key << "rx_start" << YAML::Value;
        emit_point(out, e.rx_start);
        out << YAML::Key << "rx_direction" << YAML::Value;
        emit_point(out, e.rx_direction);
        out << YAML::Key << "step_m" << YAML::Value << e.step;
        out << YAML::Key << "positions" << YAML::Value << e.positions;
        out << YAML::Key << "person" << YAML::Value;
        emit_point(out, e.person);
        out << YAML::Key << "pdp_bin_ps" << YAML::Value << e.pdp_bin * 1e12;
        out << YAML::Key << "late_window_ns" << YAML::Value << YAML::Flow << YAML::BeginSeq << e.late_start * 1e9
            << e.late_end * 1e9 << YAML::EndSeq;
        out << YAML::EndMap;
    }

    if (c.kind == ExperimentKind::presence) {
        const auto& p = c.presence;
        out << YAML::Key << "presence" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "tx" << YAML::Value;
        emit_point(out, p.tx);
        out << YAML::Key << "rx_center" << YAML::Value;
        emit_point(out, p.rx_center);
        out << YAML::Key << "swing_direction" << YAML::Value;
        emit_point(out, p.swing_direction);
        out << YAML::Key << "swing_half_period_s" << YAML::Value << p.swing_half_period;
        out << YAML::Key << "capture_period_s" << YAML::Value << p.capture_period;
        out << YAML::Key << "walk_speed_mps" << YAML::Value << p.walk_speed;
        out << YAML::Key << "approach_offset_m" << YAML::Value << p.approach_offset;
        out << YAML::Key << "rest_position" << YAML::Value;
        emit_point(out, p.rest_position);
        out << YAML::Key << "truth_margin_m" << YAML::Value << p.truth_margin;
        out << YAML::Key << "episode_gap_s" << YAML::Value << p.episode_gap;
        out << YAML::Key << "detector" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "tau" << YAML::Value << p.detector.tau;
        out << YAML::Key << "short_len" << YAML::Value << p.detector.short_len;
        out << YAML::Key << "long_len" << YAML::Value << p.detector.long_len;
        out << YAML::Key << "event_window" << YAML::Value << p.detector.event_window;
        out << YAML::Key << "event_count_threshold" << YAML::Value << p.detector.event_count_threshold;
        out << YAML::EndMap;
        out << YAML::Key << "variants" << YAML::Value << YAML::BeginSeq;
        for (const auto& v : p.variants) {
            out << YAML::BeginMap;
            out << YAML::Key << "name" << YAML::Value << v.name;
            out << YAML::Key << "displacement_m" << YAML::Value << v.displacement;
            out << YAML::Key << "duration_s" << YAML::Value << v.duration;
            out << YAML::Key << "crossings" << YAML::Value << YAML::BeginSeq;
            for (const auto& x : v.crossings) {
                out << YAML::Flow << YAML::BeginMap;
                out << YAML::Key << "time_s" << YAML::Value << x.time;
                out << YAML::Key << "link_fraction" << YAML::Value << x.link_fraction;
                out << YAML::Key << "angle_deg" << YAML::Value << x.angle_deg;
                out << YAML::Key << "dwell_s" << YAML::Value << x.dwell;
                out << YAML::EndMap;
            }
            out << YAML::EndSeq << YAML::EndMap;
        }
        out << YAML::EndSeq << YAML::EndMap;
    }

    if (c.kind == ExperimentKind::localization) {
        const auto& l = c.localization;
        out << YAML::Key << "localization" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "transmitters" << YAML::Value << YAML::BeginSeq;
        for (const auto& t : l.transmitters) emit_point(out, t);
        out << YAML::EndSeq;
        out << YAML::Key << "tracks" << YAML::Value << YAML::BeginSeq;
        for (const auto& t : l.tracks) {
            out << YAML::Flow << YAML::BeginMap;
            out << YAML::Key << "name" << YAML::Value << t.name;
            out << YAML::Key << "from" << YAML::Value;
            emit_point(out, t.from);
            out << YAML::Key << "to" << YAML::Value;
            emit_point(out, t.to);
            out << YAML::EndMap;
        }
        out << YAML::EndSeq;
        out << YAML::Key << "speed_mps" << YAML::Value << l.speed;
        out << YAML::Key << "capture_period_s" << YAML::Value << l.capture_period;
        out << YAML::Key << "position_log_period_s" << YAML::Value << l.position_log_period;
        out << YAML::Key << "position_noise_m" << YAML::Value << l.position_noise;
        out << YAML::Key << "max_spacing_m" << YAML::Value << l.max_spacing;
        out << YAML::Key << "association_cutoff_m" << YAML::Value << l.association_cutoff;
        out << YAML::Key << "monitored_area" << YAML::Value;
        emit_bounds(out, l.monitored_area);
        out << YAML::Key << "standing_positions" << YAML::Value << YAML::BeginSeq;
        for (const auto& s : l.standing_positions) emit_point(out, s);
        out << YAML::EndSeq;
        out << YAML::Key << "rti" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "excess_m" << YAML::Value << l.rti.excess;
        out << YAML::Key << "voxel_m" << YAML::Value << l.rti.voxel_size;
        out << YAML::Key << "sigma2_m" << YAML::Value << l.rti.sigma2_m;
        out << YAML::Key << "sigma2_x" << YAML::Value << l.rti.sigma2_x;
        out << YAML::Key << "correlation_m" << YAML::Value << l.rti.correlation;
        out << YAML::EndMap << YAML::EndMap;
    }
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

}  // namespace uwbdfl
