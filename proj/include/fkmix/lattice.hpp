#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fkmix {

class domain_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class resource_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class accuracy_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct EdgeId {
    int v = 0;
    friend bool operator==(EdgeId, EdgeId) = default;
};

struct DualEdgeId {
    int v = 0;
    friend bool operator==(DualEdgeId, DualEdgeId) = default;
};

struct Point {
    int x = 0;
    int y = 0;
    friend bool operator==(Point, Point) = default;
};

// Box [-R,R]^2 of the square lattice.
//
// Vertex (x,y) has id (y+R)*L + (x+R) with L = 2R+1.
// Horizontal edges (x,y)-(x+1,y) come first, row-major:  (y+R)*(L-1) + (x+R).
// Vertical edges (x,y)-(x,y+1) follow:  L*(L-1) + (y+R)*L + (x+R).
//
// Dual vertex (a,b) sits at (a+1/2, b+1/2), a,b in [-R-1, R], id (b+R+1)*(L+1) + (a+R+1).
// Dual horizontal edges (a,b)-(a+1,b) cross the primal vertical edge (a+1,b)-(a+1,b+1)
// and are numbered first, row-major in (b,a); dual vertical edges (a,b)-(a,b+1) cross the
// primal horizontal edge (a,b+1)-(a+1,b+1).
class BoxLattice {
public:
    explicit BoxLattice(int R);

    int R() const { return R_; }
    int side() const { return L_; }
    int num_vertices() const { return L_ * L_; }
    int num_edges() const { return 2 * nh_; }
    int num_horizontal() const { return nh_; }
    int num_dual_vertices() const { return (L_ + 1) * (L_ + 1); }

    int vertex(int x, int y) const { return (y + R_) * L_ + (x + R_); }
    int vertex(Point p) const { return vertex(p.x, p.y); }
    Point point(int v) const { return {v % L_ - R_, v / L_ - R_}; }
    bool contains(int x, int y) const { return x >= -R_ && x <= R_ && y >= -R_ && y <= R_; }
    bool on_boundary(int v) const;
    int degree(int v) const;
    const std::vector<int>& boundary() const { return boundary_; }

    EdgeId horizontal(int x, int y) const { return {(y + R_) * (L_ - 1) + (x + R_)}; }
    EdgeId vertical(int x, int y) const { return {nh_ + (y + R_) * L_ + (x + R_)}; }
    bool is_horizontal(EdgeId e) const { return e.v < nh_; }
    // Endpoints ordered so that the second is the first plus (1,0) or (0,1).
    std::pair<Point, Point> ends(EdgeId e) const;
    std::pair<int, int> end_ids(EdgeId e) const;
    // Up to four (neighbor vertex, edge) pairs.
    int neighbors(int v, int* nbr, int* edge) const;

    int dual_vertex(int a, int b) const { return (b + R_ + 1) * (L_ + 1) + (a + R_ + 1); }
    Point dual_point(int f) const { return {f % (L_ + 1) - R_ - 1, f / (L_ + 1) - R_ - 1}; }
    // Dual vertices on the outer ring lie outside the box.
    bool dual_outside(int a, int b) const { return a < -R_ || a >= R_ || b < -R_ || b >= R_; }
    DualEdgeId dual_edge(EdgeId e) const;
    EdgeId dual_edge(DualEdgeId d) const;
    std::pair<int, int> dual_end_ids(DualEdgeId d) const;
    // The two faces separated by e, as dual vertex ids (below/left first).
    std::pair<int, int> faces(EdgeId e) const;

    void check(EdgeId e) const;
    void check(DualEdgeId d) const;

private:
    int R_;
    int L_;
    int nh_;
    std::vector<int> boundary_;
};

struct EdgeConfig {
    std::vector<uint8_t> bits;

    EdgeConfig() = default;
    EdgeConfig(const BoxLattice& lat, bool open) : bits(lat.num_edges(), open ? 1 : 0) {}

    bool operator[](EdgeId e) const { return bits[e.v] != 0; }
    void set(EdgeId e, bool open) { bits[e.v] = open ? 1 : 0; }
    int size() const { return static_cast<int>(bits.size()); }
    int open_count() const;
    friend bool operator==(const EdgeConfig&, const EdgeConfig&) = default;
};

// Dual configuration, indexed by DualEdgeId: dual edge open iff primal edge closed.
std::vector<uint8_t> dual_config(const BoxLattice& lat, const EdgeConfig& cfg);
EdgeConfig from_dual_config(const BoxLattice& lat, const std::vector<uint8_t>& dual);

struct AnnulusSpec {
    int r_inner = 1;
    int r_outer = 2;

    static AnnulusSpec from_delta(int r, double delta);
};

void check_annulus(const BoxLattice& lat, const AnnulusSpec& ann);

class BoundaryCondition {
public:
    enum class Kind { Free, Wired, Partition };

    static BoundaryCondition free() { return BoundaryCondition(Kind::Free, {}); }
    static BoundaryCondition wired() { return BoundaryCondition(Kind::Wired, {}); }
    // Classes of boundary vertex ids; vertices not listed are singletons.
    static BoundaryCondition partition(const BoxLattice& lat, std::vector<std::vector<int>> classes);

    Kind kind() const { return kind_; }
    const std::vector<std::vector<int>>& classes() const { return classes_; }
    // Class index of v, or -1 when v is not identified with anything.
    int class_of(const BoxLattice& lat, int v) const;
    std::string name() const;

private:
    BoundaryCondition(Kind k, std::vector<std::vector<int>> c) : kind_(k), classes_(std::move(c)) {}
    Kind kind_;
    std::vector<std::vector<int>> classes_;
};

bool connected(const BoxLattice& lat, const EdgeConfig& cfg, const BoundaryCondition& bc, int u, int v,
               std::optional<EdgeId> excluding = std::nullopt);

int cluster_count(const BoxLattice& lat, const EdgeConfig& cfg, const BoundaryCondition& bc);
int cluster_count_bfs(const BoxLattice& lat, const EdgeConfig& cfg, const BoundaryCondition& bc);

// Cluster label per vertex under bc identification, labels dense from 0.
std::vector<int> cluster_labels(const BoxLattice& lat, const EdgeConfig& cfg, const BoundaryCondition& bc,
                                int* count = nullptr);

class UnionFind {
public:
    explicit UnionFind(int n);
    int find(int a);
    bool unite(int a, int b);
    int components() const { return comps_; }

private:
    std::vector<int> parent_;
    std::vector<int> rank_;
    int comps_;
};

} // namespace fkmix
