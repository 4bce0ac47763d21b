#pragma once

#include "lbws/common.hpp"
#include "lbws/dof_map.hpp"
#include "lbws/mesh.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <stdexcept>

namespace lbws {

/// Structured nonoverlapping decomposition into a grid of element boxes,
/// plus the element-layer overlap used by the first Schwarz level.
struct Partition {
    std::array<int, 3> grid{};
    std::vector<int> element_subdomain;              // element -> subdomain
    std::vector<std::vector<Index>> subdomain_nodes; // closure node set per subdomain, sorted
    std::vector<std::vector<int>> node_subdomains;   // node -> sorted subdomain ids
    std::vector<int> node_owner;                     // lowest containing subdomain
    std::vector<Index> interface_nodes;              // nodes shared by >= 2 subdomains
    std::vector<std::vector<Index>> overlap_nodes;   // per subdomain, after grow_overlap
    int overlap_layers = -1;                         // -1 until grown

    int subdomain_count() const { return grid[0] * grid[1] * grid[2]; }
};

inline Partition partition_structured(const Mesh& mesh, std::array<int, 3> grid) {
    for (int a = 0; a < 3; ++a) {
        if (grid[static_cast<std::size_t>(a)] < 1)
            throw std::invalid_argument("partition_structured: grid count must be >= 1");
        if (mesh.cells[static_cast<std::size_t>(a)] % grid[static_cast<std::size_t>(a)] != 0)
            throw std::invalid_argument("partition_structured: cell count not divisible by grid on axis " +
                                        std::to_string(a));
    }
    Partition part;
    part.grid = grid;
    const int sx = mesh.cells[0] / grid[0], sy = mesh.cells[1] / grid[1], sz = mesh.cells[2] / grid[2];
    const int nsub = part.subdomain_count();

    part.element_subdomain.resize(static_cast<std::size_t>(mesh.element_count()));
    for (Index e = 0; e < mesh.element_count(); ++e) {
        const auto ijk = mesh.element_coords_ijk(e);
        const int s = (ijk[0] / sx) + grid[0] * ((ijk[1] / sy) + grid[1] * (ijk[2] / sz));
        part.element_subdomain[static_cast<std::size_t>(e)] = s;
    }

    std::vector<std::vector<int>> node_subs(static_cast<std::size_t>(mesh.node_count()));
    for (Index e = 0; e < mesh.element_count(); ++e) {
        const int s = part.element_subdomain[static_cast<std::size_t>(e)];
        for (Index node : mesh.element_nodes(e)) {
            auto& subs = node_subs[static_cast<std::size_t>(node)];
            if (std::find(subs.begin(), subs.end(), s) == subs.end()) subs.push_back(s);
        }
    }
    part.node_subdomains = std::move(node_subs);
    part.subdomain_nodes.resize(static_cast<std::size_t>(nsub));
    part.node_owner.resize(static_cast<std::size_t>(mesh.node_count()));
    for (Index node = 0; node < mesh.node_count(); ++node) {
        auto& subs = part.node_subdomains[static_cast<std::size_t>(node)];
        std::sort(subs.begin(), subs.end());
        part.node_owner[static_cast<std::size_t>(node)] = subs.front();
        for (int s : subs) part.subdomain_nodes[static_cast<std::size_t>(s)].push_back(node);
        if (subs.size() >= 2) part.interface_nodes.push_back(node);
    }
    return part;
}

/// Grow the overlapping node sets by k rounds of element-adjacency dilation
/// (elements sharing at least one node), then take the node closure.
inline void grow_overlap(Partition& part, const Mesh& mesh, int layers) {
    if (layers < 0) throw std::invalid_argument("grow_overlap: layers must be >= 0");
    const int nsub = part.subdomain_count();
    part.overlap_nodes.assign(static_cast<std::size_t>(nsub), {});
    part.overlap_layers = layers;

    std::vector<std::vector<Index>> node_elements(static_cast<std::size_t>(mesh.node_count()));
    for (Index e = 0; e < mesh.element_count(); ++e)
        for (Index node : mesh.element_nodes(e)) node_elements[static_cast<std::size_t>(node)].push_back(e);

    for (int s = 0; s < nsub; ++s) {
        std::vector<std::uint8_t> in_set(static_cast<std::size_t>(mesh.element_count()), 0);
        std::vector<Index> frontier;
        for (Index e = 0; e < mesh.element_count(); ++e)
            if (part.element_subdomain[static_cast<std::size_t>(e)] == s) {
                in_set[static_cast<std::size_t>(e)] = 1;
                frontier.push_back(e);
            }
        for (int round = 0; round < layers; ++round) {
            std::vector<Index> next;
            for (Index e : frontier)
                for (Index node : mesh.element_nodes(e))
                    for (Index adj : node_elements[static_cast<std::size_t>(node)])
                        if (!in_set[static_cast<std::size_t>(adj)]) {
                            in_set[static_cast<std::size_t>(adj)] = 1;
                            next.push_back(adj);
                        }
            frontier = std::move(next);
            if (frontier.empty()) break;
        }
        std::vector<std::uint8_t> node_in(static_cast<std::size_t>(mesh.node_count()), 0);
        for (Index e = 0; e < mesh.element_count(); ++e)
            if (in_set[static_cast<std::size_t>(e)])
                for (Index node : mesh.element_nodes(e)) node_in[static_cast<std::size_t>(node)] = 1;
        auto& out = part.overlap_nodes[static_cast<std::size_t>(s)];
        for (Index node = 0; node < mesh.node_count(); ++node)
            if (node_in[static_cast<std::size_t>(node)]) out.push_back(node);
    }
}

enum class InterfaceKind { face, edge, vertex };

inline const char* to_string(InterfaceKind k) {
    switch (k) {
        case InterfaceKind::face: return "face";
        case InterfaceKind::edge: return "edge";
        case InterfaceKind::vertex: return "vertex";
    }
    return "?";
}

/// Equivalence class of interface nodes sharing the same subdomain set.
struct InterfaceClass {
    std::vector<int> subdomains;  // sorted
    std::vector<Index> nodes;     // sorted
    InterfaceKind kind = InterfaceKind::face;
};

/// Group interface nodes by their exact subdomain set: two subdomains form a
/// face, more than two an edge, and single-node edges count as vertices.
/// Nodes whose four DOFs are all statically constrained are excluded; the
/// per-field Dirichlet masking of coarse values happens when the basis
/// columns are filled.
inline std::vector<InterfaceClass> classify_interface(const Partition& part, const DofMap& dofmap) {
    std::vector<std::uint8_t> fully_constrained(static_cast<std::size_t>(dofmap.node_count()), 0);
    {
        std::vector<int> count(static_cast<std::size_t>(dofmap.node_count()), 0);
        for (const auto& bc : dofmap.displacement_bcs()) ++count[static_cast<std::size_t>(bc.node)];
        for (const auto& bc : dofmap.temperature_bcs()) ++count[static_cast<std::size_t>(bc.node)];
        for (std::size_t n = 0; n < count.size(); ++n)
            if (count[n] >= kDofsPerNode) fully_constrained[n] = 1;
    }

    std::map<std::vector<int>, std::vector<Index>> groups;
    for (Index node : part.interface_nodes) {
        if (fully_constrained[static_cast<std::size_t>(node)]) continue;
        groups[part.node_subdomains[static_cast<std::size_t>(node)]].push_back(node);
    }

    std::vector<InterfaceClass> classes;
    classes.reserve(groups.size());
    for (auto& [subs, nodes] : groups) {
        InterfaceClass cls;
        cls.subdomains = subs;
        cls.nodes = std::move(nodes);
        std::sort(cls.nodes.begin(), cls.nodes.end());
        if (cls.subdomains.size() == 2)
            cls.kind = InterfaceKind::face;
        else
            cls.kind = cls.nodes.size() == 1 ? InterfaceKind::vertex : InterfaceKind::edge;
        classes.push_back(std::move(cls));
    }
    return classes;  // map iteration gives a canonical subdomain-set order
}

struct ClassCounts {
    int faces = 0, edges = 0, vertices = 0;
};

inline ClassCounts count_classes(const std::vector<InterfaceClass>& classes) {
    ClassCounts c;
    for (const auto& cls : classes) {
        if (cls.kind == InterfaceKind::face) ++c.faces;
        else if (cls.kind == InterfaceKind::edge) ++c.edges;
        else ++c.vertices;
    }
    return c;
}

enum class CoarseVariant { gdsw, gdsw_star, rgdsw };

inline const char* to_string(CoarseVariant v) {
    switch (v) {
        case CoarseVariant::gdsw: return "GDSW";
        case CoarseVariant::gdsw_star: return "GDSW*";
        case CoarseVariant::rgdsw: return "RGDSW";
    }
    return "?";
}

/// One coarse interface component: weighted nodes forming part of the
/// interface partition of unity.
struct Component {
    std::vector<std::pair<Index, double>> nodes;  // (node, weight), sorted by node
    std::vector<int> subdomains;                  // union of member-class subdomain sets
};

struct ComponentSet {
    CoarseVariant variant = CoarseVariant::gdsw;
    std::vector<Component> components;
    ClassCounts counts;
};

namespace detail {

inline bool subset_of(const std::vector<int>& a, const std::vector<int>& b) {
    return a.size() <= b.size() && std::includes(b.begin(), b.end(), a.begin(), a.end());
}

inline void merge_subdomains(std::vector<int>& into, const std::vector<int>& from) {
    std::vector<int> merged;
    std::set_union(into.begin(), into.end(), from.begin(), from.end(), std::back_inserter(merged));
    into = std::move(merged);
}

inline bool touches_node(const Mesh& mesh, const InterfaceClass& cls, Index node) {
    for (Index n : cls.nodes)
        if (mesh.nodes_adjacent(n, node)) return true;
    return false;
}

} // namespace detail

/// Build the coarse interface components of one GDSW-family variant.
///
/// GDSW keeps every class as its own component with weight one. GDSW* merges
/// each vertex with its adjacent edges (subdomain-set inclusion plus mesh
/// incidence) and keeps faces standalone. RGDSW roots are the locally maximal
/// classes under subdomain-set inclusion; every other class is spread over
/// its covering roots with inverse-multiplicity weights. A class no root
/// covers falls back to a standalone component.
inline ComponentSet build_components(const std::vector<InterfaceClass>& classes, CoarseVariant variant,
                                     const Mesh& mesh) {
    ComponentSet set;
    set.variant = variant;
    set.counts = count_classes(classes);
    const std::size_t nc = classes.size();

    // component memberships per class: list of (component id) this class feeds
    std::vector<std::vector<int>> class_components(nc);
    std::vector<Component> components;

    auto standalone = [&](std::size_t c) {
        Component comp;
        comp.subdomains = classes[c].subdomains;
        class_components[c].push_back(static_cast<int>(components.size()));
        components.push_back(std::move(comp));
    };

    if (variant == CoarseVariant::gdsw) {
        for (std::size_t c = 0; c < nc; ++c) standalone(c);
    } else if (variant == CoarseVariant::gdsw_star) {
        std::vector<int> vertex_component(nc, -1);
        for (std::size_t c = 0; c < nc; ++c) {
            if (classes[c].kind != InterfaceKind::vertex) continue;
            vertex_component[c] = static_cast<int>(components.size());
            standalone(c);
        }
        for (std::size_t c = 0; c < nc; ++c) {
            if (classes[c].kind == InterfaceKind::vertex) continue;
            if (classes[c].kind == InterfaceKind::edge) {
                for (std::size_t v = 0; v < nc; ++v) {
                    if (vertex_component[v] < 0) continue;
                    if (!detail::subset_of(classes[c].subdomains, classes[v].subdomains)) continue;
                    if (classes[c].subdomains.size() == classes[v].subdomains.size()) continue;
                    if (!detail::touches_node(mesh, classes[c], classes[v].nodes.front())) continue;
                    const int comp = vertex_component[v];
                    class_components[c].push_back(comp);
                    detail::merge_subdomains(components[static_cast<std::size_t>(comp)].subdomains,
                                             classes[c].subdomains);
                }
            }
            if (class_components[c].empty()) standalone(c);  // faces and uncovered edges
        }
    } else {
        std::vector<std::uint8_t> is_root(nc, 1);
        for (std::size_t c = 0; c < nc; ++c)
            for (std::size_t o = 0; o < nc; ++o) {
                if (o == c) continue;
                if (detail::subset_of(classes[c].subdomains, classes[o].subdomains) &&
                    classes[c].subdomains.size() < classes[o].subdomains.size()) {
                    is_root[c] = 0;
                    break;
                }
            }
        std::vector<int> root_component(nc, -1);
        for (std::size_t c = 0; c < nc; ++c)
            if (is_root[c]) {
                root_component[c] = static_cast<int>(components.size());
                standalone(c);
            }
        for (std::size_t c = 0; c < nc; ++c) {
            if (is_root[c]) continue;
            for (std::size_t r = 0; r < nc; ++r)
                if (root_component[r] >= 0 && detail::subset_of(classes[c].subdomains, classes[r].subdomains)) {
                    const int comp = root_component[r];
                    class_components[c].push_back(comp);
                    detail::merge_subdomains(components[static_cast<std::size_t>(comp)].subdomains,
                                             classes[c].subdomains);
                }
            if (class_components[c].empty()) standalone(c);
        }
    }

    for (std::size_t c = 0; c < nc; ++c) {
        const double weight = 1.0 / static_cast<double>(class_components[c].size());
        for (int comp : class_components[c])
            for (Index node : classes[c].nodes)
                components[static_cast<std::size_t>(comp)].nodes.emplace_back(node, weight);
    }
    for (auto& comp : components)
        std::sort(comp.nodes.begin(), comp.nodes.end());

    set.components = std::move(components);
    return set;
}

/// One class per line: kind, subdomain set, node count (debug/fixture dump).
inline void dump_classes_jsonl(const std::vector<InterfaceClass>& classes, std::ostream& os) {
    for (const auto& cls : classes) {
        os << "{\"kind\":\"" << to_string(cls.kind) << "\",\"subdomains\":[";
        for (std::size_t i = 0; i < cls.subdomains.size(); ++i)
            os << (i ? "," : "") << cls.subdomains[i];
        os << "],\"nodes\":" << cls.nodes.size() << "}\n";
    }
}

} // namespace lbws
