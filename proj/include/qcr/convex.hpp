#pragma once

#include "qcr/model.hpp"

#include <cstdint>
#include <optional>

namespace qcr {

// Compact convex polytope (convex hull of vertices) or closed polyhedral cone
// (conical hull of generators) in R^m.
class ConvexBody {
public:
    static ConvexBody polytope(std::vector<RVec> vertices);
    static ConvexBody cone(std::vector<RVec> generators);
    static ConvexBody empty(int m);
    static ConvexBody box(const RVec& lo, const RVec& hi);

    int dim() const { return m_; }
    bool is_cone() const { return is_cone_; }
    bool is_empty() const { return vertices_.empty(); }
    const std::vector<RVec>& vertices() const { return vertices_; }

    bool contains(const RVec& lambda, double tol = 1e-12) const;
    // Dimension of the affine hull (polytope) or linear hull (cone); -1 when empty.
    int hull_dim() const { return hull_dim_; }
    bool has_interior() const { return hull_dim_ == m_; }

    // Facets as unit outward normals a and offsets b with K = {a . x <= b}; only
    // for full-dimensional bodies (cones: b = 0).
    const std::vector<RVec>& facet_normals() const { return normals_; }
    const std::vector<double>& facet_offsets() const { return offsets_; }

    RVec bbox_lo() const;
    RVec bbox_hi() const;

private:
    ConvexBody(int m, std::vector<RVec> v, bool cone);
    void build();

    int m_ = 0;
    bool is_cone_ = false;
    std::vector<RVec> vertices_;
    int hull_dim_ = -1;
    RVec origin_;
    RMat basis_;  // m x r orthonormal basis of the hull directions
    std::vector<RVec> local_normals_;
    std::vector<double> local_offsets_;
    std::vector<RVec> normals_;
    std::vector<double> offsets_;
};

// H_K(v) = sup over K of -<lambda, v>.
double support_function(const ConvexBody& K, const RVec& v);

struct PolarBody {
    std::vector<RVec> generators;
    bool is_cone = false;
    int m = 0;
    bool contains(const RVec& lambda, double tol = 1e-12) const;
    // Extreme rays (and lineality directions) of a polar cone; m <= 3 only.
    std::vector<RVec> cone_generators() const;
};

PolarBody polar(const std::vector<RVec>& generators, bool is_cone);

// Vertices of the polar of a finite set whose hull contains 0 in its interior.
std::vector<RVec> polar_vertices(const std::vector<RVec>& points);

// Vertices of the bounded polyhedron {x : a_i . x <= b_i}; empty when infeasible.
std::vector<RVec> vertices_from_halfspaces(const std::vector<RVec>& a, const std::vector<double>& b);

double boundary_distance(const ConvexBody& K, const RVec& lambda);

ConvexBody erode(const ConvexBody& K, double eps);

double cone_inequality_constant(const ConvexBody& K, int samples, std::uint64_t seed);

// Coordinates of the projected vertices in the given orthonormal basis (columns).
ConvexBody project_body(const ConvexBody& K, const RMat& basis);

bool lambda_plus_contains(const QuadraticModel& model, const RVec& lambda);
bool P_contains(const QuadraticModel& model, const RVec& lambda);

}  // namespace qcr
