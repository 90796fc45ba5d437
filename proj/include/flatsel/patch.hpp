// Face subsets of a TriMesh and the topology operations on them.
//
// A Patch carries its own vertex numbering ("local" vertices). Until it is
// cut, local vertices correspond one-to-one to the mesh vertices its faces
// use; cut_to_disk duplicates local vertices along seams, so several local
// vertices may share one `vertex_origin`.
#pragma once

#include <array>
#include <span>
#include <vector>

#include "flatsel/mesh.hpp"
#include "flatsel/weights.hpp"

namespace flatsel {

struct Patch {
    std::vector<int> faces;                  // mesh face ids, ascending
    int seed = -1;                           // mesh face id, member of faces
    std::vector<std::array<int, 3>> corners;  // local vertex ids, corner order of the mesh face
    std::vector<int> vertex_origin;          // local vertex -> mesh vertex
    std::vector<std::vector<int>> boundary_loops;  // closed loops of local vertex ids
    bool is_disk = false;
    int seam_cuts = 0;                       // cut operations applied by cut_to_disk

    int num_faces() const { return static_cast<int>(faces.size()); }
    int num_vertices() const { return static_cast<int>(vertex_origin.size()); }
    int num_edges() const;
    int euler_characteristic() const { return num_vertices() - num_edges() + num_faces(); }

    // Position of mesh face `face` in `faces`, or -1.
    int local_face(int face) const;
    bool contains(int face) const { return local_face(face) >= 0; }
};

// Builds an uncut patch over `faces` (duplicates removed) with loops and the
// disk flag filled in. `seed` must be one of the faces.
Patch make_patch(const TriMesh& mesh, std::vector<int> faces, int seed);
// Every mesh face, with local vertex ids equal to mesh vertex ids.
Patch whole_mesh_patch(const TriMesh& mesh, int seed = 0);

// Edge-connected component of {t : w_t >= threshold} containing `seed`;
// just {seed} when the seed itself is below threshold.
Patch floodfill_patch(const TriMesh& mesh, const WeightField& weights, int seed, double threshold);

// Same component, as plain face ids (ascending).
std::vector<int> floodfill_faces(const TriMesh& mesh, const WeightField& weights, int seed,
                                 double threshold);

// Closed loops of boundary edges, each edge in exactly one loop. Loops are
// ordered by their lowest boundary corner, vertices in traversal order.
std::vector<std::vector<int>> boundary_loops(const TriMesh& mesh, const Patch& patch);

double loop_length(const TriMesh& mesh, const Patch& patch, const std::vector<int>& loop);

bool is_edge_connected(const TriMesh& mesh, std::span<const int> faces);

// Recomputes boundary_loops and is_disk from the corner table.
void refresh_topology(const TriMesh& mesh, Patch& patch);

// Splits the patch along shortest edge paths until it is a topological
// disk. Faces are never removed; only local vertices are duplicated.
// Throws Error if the patch is not edge-connected.
Patch cut_to_disk(const TriMesh& mesh, const Patch& patch);

}  // namespace flatsel
