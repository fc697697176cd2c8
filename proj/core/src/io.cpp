#include "mdlvq/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace mdlvq {

namespace {

json ivec_to_json(const IVec& v) {
  json a = json::array();
  for (int i = 0; i < v.dim(); ++i) a.push_back(v[i]);
  return a;
}

IVec ivec_from_json(const json& j) {
  IVec v(static_cast<int>(j.size()));
  for (int i = 0; i < v.dim(); ++i) v[i] = j[static_cast<size_t>(i)].get<i64>();
  return v;
}

json imat_to_json(const IMat& m) {
  json a = json::array();
  for (int i = 0; i < m.n; ++i) a.push_back(ivec_to_json(m.row(i)));
  return a;
}

IMat imat_from_json(const json& j) {
  IMat m(static_cast<int>(j.size()));
  for (int i = 0; i < m.n; ++i) {
    IVec row = ivec_from_json(j[static_cast<size_t>(i)]);
    for (int c = 0; c < m.n; ++c) m.at(i, c) = row[c];
  }
  return m;
}

}  // namespace

json frac_to_json(const Frac& f) {
  return json{{"num", f.num}, {"den", f.den}};
}

json lattice_to_json(const Lattice& lat) {
  json j;
  j["schema"] = "mdlvq-lattice/1";
  j["family"] = family_name(lat.family);
  j["dim"] = lat.dim;
  j["scale"] = lat.scale;
  json rows = json::array();
  for (int i = 0; i < lat.dim; ++i) {
    json row = json::array();
    for (int c = 0; c < lat.dim; ++c) row.push_back(lat.gen.at(i, c));
    rows.push_back(row);
  }
  j["generator"] = rows;
  return j;
}

Lattice lattice_from_json(const json& j) {
  Family f = family_from_name(j.at("family").get<std::string>());
  int dim = j.at("dim").get<int>();
  double scale = j.value("scale", 1.0);
  Lattice lat = Lattice::make(f, dim, scale);
  if (j.contains("generator")) {
    const json& rows = j.at("generator");
    if (static_cast<int>(rows.size()) != dim)
      throw std::invalid_argument("generator row count does not match dim");
    for (int r = 0; r < dim; ++r)
      for (int c = 0; c < dim; ++c) {
        double got = rows[static_cast<size_t>(r)][static_cast<size_t>(c)].get<double>();
        if (std::fabs(got - lat.gen.at(r, c)) > 1e-9 * (1.0 + std::fabs(got)))
          throw std::invalid_argument("generator rows disagree with the family basis");
      }
  }
  return lat;
}

json sublattice_to_json(const SimilarSublattice& s, const SublatticePredicates* preds) {
  json j;
  j["schema"] = "mdlvq-sublattice/1";
  j["construction"] = s.construction;
  json params = json::array();
  for (i64 p : s.params) params.push_back(p);
  j["params"] = params;
  j["n"] = s.index_n;
  j["beta"] = s.beta;
  j["basis"] = imat_to_json(s.U);
  if (preds) {
    json pj;
    pj["clean"] = preds->clean.clean;
    if (preds->clean.witness) pj["clean_witness"] = ivec_to_json(*preds->clean.witness);
    pj["cell_points"] = preds->clean.cell_points;
    pj["centric"] = preds->centric.centric;
    if (preds->centric.witness) pj["centric_witness"] = ivec_to_json(*preds->centric.witness);
    pj["s_similar"] = preds->s_similar.s_similar;
    if (preds->s_similar.rotation_coeff)
      pj["s_certificate"] = imat_to_json(*preds->s_similar.rotation_coeff);
    j["predicates"] = pj;
  }
  return j;
}

json assignment_to_json(const IndexAssignment& asg) {
  json j;
  j["schema"] = "mdlvq-assignment/1";
  j["units"] = "coordinates are basis coefficients of the parent lattice";
  j["lattice"] = lattice_to_json(asg.lat);
  json sub = sublattice_to_json(asg.sub);
  j["sublattice"] = sub;
  j["k"] = asg.K;
  json labels = json::array();
  for (const Label& l : asg.labels) {
    json lj;
    lj["central"] = ivec_to_json(l.central);
    lj["site"] = ivec_to_json(l.site_u);
    IVec id(l.site_u.dim());
    for (int i = 0; i < l.site_u.dim(); ++i) {
      i64 m = l.site_u[i] % asg.K;
      id[i] = m < 0 ? m + asg.K : m;
    }
    lj["coset"] = ivec_to_json(id);
    json tuple = json::array();
    for (const IVec& p : l.tuple.points) tuple.push_back(ivec_to_json(p));
    lj["tuple"] = tuple;
    labels.push_back(lj);
  }
  j["labels"] = labels;
  return j;
}

IndexAssignment assignment_from_json(const json& j) {
  if (j.value("schema", "") != "mdlvq-assignment/1")
    throw std::invalid_argument("not an assignment file");
  IndexAssignment asg;
  asg.lat = lattice_from_json(j.at("lattice"));
  const json& sj = j.at("sublattice");
  IMat U = imat_from_json(sj.at("basis"));
  std::vector<i64> params;
  for (const auto& p : sj.at("params")) params.push_back(p.get<i64>());
  asg.sub = make_similar(asg.lat, U, sj.value("construction", "custom"), params);
  asg.K = j.at("k").get<int>();
  asg.reps = coset_representatives(asg.sub, asg.K);
  const int K = asg.K;
  for (const auto& lj : j.at("labels")) {
    Label l;
    l.central = ivec_from_json(lj.at("central"));
    l.site_u = ivec_from_json(lj.at("site"));
    l.site_micro = l.site_u * asg.sub.U;
    for (const auto& pj : lj.at("tuple")) {
      IVec p = ivec_from_json(pj);
      l.tuple.points.push_back(p);
    }
    // recompute the exact cost and coefficient views
    IVec centroid = l.tuple.points.front();
    for (size_t i = 1; i < l.tuple.points.size(); ++i) centroid = centroid + l.tuple.points[i];
    if (!(centroid == l.site_micro))
      throw std::invalid_argument("tuple centroid does not match the recorded site");
    IMat adj = iadjugate(asg.sub.U);
    i64 det = idet(asg.sub.U);
    l.tuple.cost_q2 = 0;
    for (const IVec& p : l.tuple.points) {
      IVec micro = static_cast<i64>(K) * p - l.site_micro;
      l.tuple.cost_q2 += asg.lat.q2(micro);
      IVec w = p * adj;
      IVec z(p.dim());
      for (int i = 0; i < p.dim(); ++i) {
        if (w[i] % det != 0) throw std::invalid_argument("tuple point is not a sublattice point");
        z[i] = w[i] / det;
      }
      l.tuple.zs.push_back(z);
    }
    asg.labels.push_back(std::move(l));
  }
  if (static_cast<i64>(asg.labels.size()) != asg.sub.index_n)
    throw std::invalid_argument("label count does not match the sublattice index");
  asg.rebuild_lookup();
  return asg;
}

json report_to_json(const DistortionReport& r) {
  json j;
  j["schema"] = "mdlvq-distortion/1";
  j["flavor"] = r.flavor;
  j["units"] = r.units;
  j["k"] = r.K;
  j["dim"] = r.dim;
  j["p"] = r.p;
  j["n"] = r.n_index;
  j["nu"] = r.nu;
  j["g_lattice"] = r.g_lat;
  j["h_bits"] = r.h_bits;
  j["ex2"] = r.ex2;
  j["d_c"] = r.d_c;
  j["side_term1"] = r.side_term1;
  j["side_term2"] = r.side_term2;
  j["d_s"] = r.d_s;
  json dk = json::array();
  for (double v : r.d_k) dk.push_back(v);
  j["d_k"] = dk;
  j["D"] = r.D;
  j["zeta1"] = r.zeta1;
  j["zeta2"] = r.zeta2;
  j["zeta"] = r.zeta;
  if (r.term1_sum) j["term1_sum"] = frac_to_json(*r.term1_sum);
  if (r.term2_sum) j["term2_sum"] = frac_to_json(*r.term2_sum);
  return j;
}

json sim_to_json(const SimResult& r) {
  json j;
  j["schema"] = "mdlvq-simulation/1";
  j["trials"] = r.trials;
  j["seed"] = r.seed;
  j["d_c_hat"] = r.d_c_hat;
  j["d_c_se"] = r.d_c_se;
  json dk = json::array();
  for (size_t k = 0; k < r.d_k_hat.size(); ++k) {
    json e;
    e["received"] = k;
    e["mean"] = r.d_k_hat[k];
    e["se"] = r.d_k_se[k];
    e["count"] = r.d_k_count[k];
    dk.push_back(e);
  }
  j["d_k"] = dk;
  j["D_hat"] = r.D_hat;
  j["D_se"] = r.D_se;
  j["units"] = "per-dimension";
  return j;
}

json compare_to_json(const CompareReport& r) {
  json j;
  j["schema"] = "mdlvq-compare/1";
  j["ds_a"] = frac_to_json(r.ds_a);
  j["ds_b"] = frac_to_json(r.ds_b);
  j["ds_diff"] = frac_to_json(r.ds_diff);
  j["ds_a_per_dim"] = r.ds_a_per_dim;
  j["ds_b_per_dim"] = r.ds_b_per_dim;
  j["D_a"] = r.D_a;
  j["D_b"] = r.D_b;
  json ca = json::array(), cb = json::array();
  for (i64 c : r.site_count_a) ca.push_back(c);
  for (i64 c : r.site_count_b) cb.push_back(c);
  j["site_counts_a"] = ca;
  j["site_counts_b"] = cb;
  j["labels_differing"] = r.labels_differing;
  return j;
}

namespace {

void dump_rec(const json& j, std::string& out, int indent, int depth) {
  auto pad = [&](int d) { out.append(static_cast<size_t>(d * indent), ' '); };
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      size_t i = 0;
      for (auto it = j.begin(); it != j.end(); ++it, ++i) {
        pad(depth + 1);
        out += json(it.key()).dump();
        out += ": ";
        dump_rec(it.value(), out, indent, depth + 1);
        if (i + 1 < j.size()) out += ',';
        out += '\n';
      }
      pad(depth);
      out += '}';
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (size_t i = 0; i < j.size(); ++i) {
        pad(depth + 1);
        dump_rec(j[i], out, indent, depth + 1);
        if (i + 1 < j.size()) out += ',';
        out += '\n';
      }
      pad(depth);
      out += ']';
      return;
    }
    case json::value_t::number_float: {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g", j.get<double>());
      out += buf;
      return;
    }
    default:
      out += j.dump();
      return;
  }
}

}  // namespace

std::string canonical_dump(const json& j, int indent) {
  std::string out;
  dump_rec(j, out, indent, 0);
  out += '\n';
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text;
}

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace mdlvq
