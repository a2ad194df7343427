#include "kdg/dg.hpp"

#include <cmath>
#include <string>

#include "kdg/error.hpp"
#include "kdg/graph.hpp"

namespace kdg {

DgSpace::DgSpace(const Mesh& mesh, int order) : mesh_(&mesh), ref_(order) {
  const int nc = mesh.num_cells();
  const int nf = mesh.num_faces();
  const int nn = ref_.num_nodes();
  const int nq = num_face_points();
  jac_.resize(nc);
  jinv_.resize(nc);
  det_.resize(nc);
  node_pos_.resize(static_cast<std::size_t>(nc) * nn);
  for (int c = 0; c < nc; ++c) {
    const auto& ids = mesh.cell(c).vertex_ids;
    const Vec3& x0 = mesh.vertex(ids[0]).coords;
    Eigen::Matrix3d j;
    for (int a = 0; a < 3; ++a) j.col(a) = mesh.vertex(ids[a + 1]).coords - x0;
    jac_[c] = j;
    jinv_[c] = j.inverse();
    det_[c] = j.determinant();
    for (int n = 0; n < nn; ++n) node_pos_[static_cast<std::size_t>(c) * nn + n] = x0 + j * ref_.nodes()[n];
  }

  face_pts_.resize(static_cast<std::size_t>(nf) * nq);
  face_w_.resize(static_cast<std::size_t>(nf) * nq);
  face_local_.assign(2 * static_cast<std::size_t>(nf), -1);
  for (int f = 0; f < nf; ++f) {
    const Face& face = mesh.face(f);
    const Vec3& p0 = mesh.vertex(face.vertex_ids[0]).coords;
    const Vec3& p1 = mesh.vertex(face.vertex_ids[1]).coords;
    const Vec3& p2 = mesh.vertex(face.vertex_ids[2]).coords;
    for (int q = 0; q < nq; ++q) {
      const auto& tq = ref_.face_rule()[q];
      face_pts_[static_cast<std::size_t>(f) * nq + q] = p0 + tq.xi[0] * (p1 - p0) + tq.xi[1] * (p2 - p0);
      face_w_[static_cast<std::size_t>(f) * nq + q] = 2.0 * face.area * tq.weight;
    }
  }

  const double tol = mesh.geometric_tolerance();
  trace_.resize(4 * static_cast<std::size_t>(nc));
  wtrace_.resize(4 * static_cast<std::size_t>(nc));
  for (int c = 0; c < nc; ++c) {
    const Cell& cell = mesh.cell(c);
    for (int a = 0; a < 4; ++a) {
      const int f = cell.faces[a];
      face_local_[2 * static_cast<std::size_t>(f) + (mesh.face(f).left_cell == c ? 0 : 1)] = a;
      const double height = 3.0 * cell.volume / mesh.face(f).area;
      Eigen::MatrixXd t(nq, nn);
      for (int q = 0; q < nq; ++q) {
        const Vec3 xi = to_reference(c, face_points(f)[q]);
        const Eigen::Vector4d lam = barycentric(xi);
        if (std::abs(lam[a]) * height > tol || lam.minCoeff() * height < -tol) {
          throw MeshError("face quadrature point does not lie on face " + std::to_string(f) + " of cell " +
                          std::to_string(c));
        }
        t.row(q) = ref_.values(xi).transpose();
      }
      Eigen::VectorXd w(nq);
      for (int q = 0; q < nq; ++q) w[q] = face_weights(f)[q];
      wtrace_[4 * static_cast<std::size_t>(c) + a] = t.transpose() * w.asDiagonal();
      trace_[4 * static_cast<std::size_t>(c) + a] = std::move(t);
    }
  }
}

int DgSpace::locate(const Vec3& x) const {
  const double tol = 1e-10;
  for (int c = 0; c < mesh_->num_cells(); ++c) {
    if (barycentric(to_reference(c, x)).minCoeff() >= -tol) return c;
  }
  return kNoCell;
}

Eigen::VectorXd DgSpace::evaluate(const NodalField& field, int c, const Vec3& x) const {
  const Eigen::VectorXd psi = ref_.values(to_reference(c, x));
  return field.block(c).transpose() * psi;
}

void DgSpace::trace(int c, int local, const double* cell_block, int m, TraceBlock& out) const {
  const ConstBlockMap f(cell_block, num_nodes(), m);
  out.noalias() = trace_matrix(c, local) * f;
}

LocalMatrices assemble_local(const DgSpace& space, int cell, const Vec3& v, double dt, double theta) {
  if (!(dt > 0.0)) throw Error("time step must be positive");
  if (!(theta > 0.0 && theta <= 1.0)) throw Error("theta must lie in (0, 1]");
  const Mesh& mesh = space.mesh();
  const ReferenceElement& ref = space.reference();
  const double det = space.jacobian_det(cell);
  const int nn = ref.num_nodes();

  LocalMatrices out;
  out.mass = det * ref.mass();
  const Vec3 vref = space.jacobian_inverse(cell) * v;
  out.convection = Eigen::MatrixXd::Zero(nn, nn);
  for (int e = 0; e < 3; ++e) out.convection += det * vref[e] * ref.convection(e);
  out.outflow = Eigen::MatrixXd::Zero(nn, nn);
  const double eps = tangential_threshold(v);
  const Cell& c = mesh.cell(cell);
  for (int a = 0; a < 4; ++a) {
    const double vn = v.dot(mesh.outward_normal(cell, a));
    if (vn > eps) {
      out.outflow += vn * space.weighted_trace(cell, a) * space.trace_matrix(cell, a);
    } else if (vn < -eps) {
      const int f = c.faces[a];
      const Face& face = mesh.face(f);
      InflowFace in;
      in.local = a;
      in.face = f;
      in.vn = vn;
      in.neighbor = face.other(cell);
      if (in.neighbor != kNoCell) in.neighbor_local = space.local_index(f, face.left_cell == cell ? 1 : 0);
      out.inflow.push_back(in);
    }
  }
  out.system = out.mass / dt - theta * out.convection + theta * out.outflow;
  return out;
}

LocalOperator factorize(const DgSpace& space, int cell, const LocalMatrices& local, double dt, double theta) {
  LocalOperator op;
  op.lu.compute(LocalMatrix(local.system));
  if (!local.system.allFinite() || !(op.lu.rcond() > 1e-14)) {
    throw NumericalError("singular local system on cell " + std::to_string(cell));
  }
  op.mass_scale = space.jacobian_det(cell) / (theta * dt);
  op.carry = (1.0 - theta) / theta;
  op.n_inflow = static_cast<int>(local.inflow.size());
  for (int a = 0; a < op.n_inflow; ++a) op.inflow[a] = local.inflow[a];
  return op;
}

void add_inflow(const DgSpace& space, int cell, const InflowFace& in, const TraceBlock& g, CellBlock& rhs) {
  rhs.noalias() += (-in.vn) * space.weighted_trace(cell, in.local) * g;
}

void solve_cell(const LocalOperator& op, const DgSpace& space, int cell, const double* f_prev, int m,
                std::span<const TraceBlock> inflow_values, double* f_out) {
  const int nn = space.num_nodes();
  const ConstBlockMap prev(f_prev, nn, m);
  CellBlock rhs(nn, m);
  rhs.noalias() = op.mass_scale * (space.reference().mass() * prev);
  for (int a = 0; a < op.n_inflow; ++a) add_inflow(space, cell, op.inflow[a], inflow_values[a], rhs);
  BlockMap out(f_out, nn, m);
  out = op.lu.solve(rhs);
  if (op.carry != 0.0) out -= op.carry * prev;
  if (!out.allFinite()) throw NumericalError("non-finite solution on cell " + std::to_string(cell));
}

}  // namespace kdg
