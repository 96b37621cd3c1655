#pragma once

#include "fkmix/lattice.hpp"

#include <iosfwd>
#include <vector>

namespace fkmix {

struct Rect {
    int x0, y0, x1, y1; // inclusive corners, x0 < x1, y0 <= y1
};

// Open left-right crossing of rect using only edges with both ends in rect.
bool has_horizontal_crossing(const BoxLattice& lat, const EdgeConfig& cfg, const Rect& rect);

enum class Side { Primal, Dual };

// Annulus regions. Primal: vertices with r_inner < |v|_inf <= r_outer.
// Dual: faces (a+1/2, b+1/2) with r_inner < |f|_inf < r_outer.
bool in_annulus_primal(const AnnulusSpec& ann, int x, int y);
bool in_annulus_dual(const AnnulusSpec& ann, int a, int b);

// Circuit winding around the origin inside the annulus region, found by
// lifting the region to the cover cut along the positive x axis.
bool has_noncontractible_circuit(const BoxLattice& lat, const EdgeConfig& cfg, const AnnulusSpec& ann, Side which);

// The same question for the primal side answered through duality: a primal
// circuit exists iff no dual-open path leads from the faces at |f| = r+1/2 to
// the faces at |f| = r_outer+1/2.
bool has_primal_circuit_by_dual_crossing(const BoxLattice& lat, const EdgeConfig& cfg, const AnnulusSpec& ann);

// A(r; delta): a non-contractible dual circuit surrounded by a
// non-contractible primal circuit, both in the annulus.
bool event_A(const BoxLattice& lat, const EdgeConfig& cfg, const AnnulusSpec& ann);

// Loops live on corners: the corner of vertex (x,y) in quadrant (sx,sy) sits
// at (4x+sx, 4y+sy) in quarter-units. It touches the vertex (x,y) and the
// face (x+sx/2, y+sy/2).
struct Loop {
    std::vector<Point> corners;
    int level = 0;
    bool around_origin = false;
    int xmin = 0, xmax = 0, ymin = 0, ymax = 0;
};

struct LoopSet {
    std::vector<Loop> loops;
    int corner_count = 0; // corners available in the traced lattice
    int outer_corners = 0; // corners of the dropped outer loop (wired)
};

// Traces every loop and fills levels from the cluster tree (each loop joins
// the primal and the dual cluster it separates).
LoopSet extract_loops(const BoxLattice& lat, const EdgeConfig& cfg, BoundaryCondition::Kind bc);
// Levels from polygon containment; throws if two loops cross.
void nesting_levels(LoopSet& set);
// Strict containment of point (X,Y) in quarter-units (not on the polygon).
bool polygon_contains(const Loop& loop, int X, int Y);
bool event_A_via_loops(const BoxLattice& lat, const EdgeConfig& cfg, BoundaryCondition::Kind bc,
                       const AnnulusSpec& ann);
bool event_A_via_loops(const LoopSet& set, BoundaryCondition::Kind bc, const AnnulusSpec& ann);
// Loops surrounding the midpoint of the edge {(0,0),(1,0)}.
int loops_around_origin(const LoopSet& set);
// Loops surrounding the point (X,Y) in quarter-units; X and Y must be even.
int loops_around_point(const LoopSet& set, int X, int Y);
// Line records: loop id, level, around-origin flag, then corner coordinates.
void dump_loops(const LoopSet& set, std::ostream& out);

} // namespace fkmix
