#pragma once
// ParamSpace: layout of the flat unconstrained sampling vector and its
// bijection to named constrained parameters.
//
// Unconstrained, per owner: coefficients b, then per smooth [bs, zs, log sds];
// per variance block: standardized effects z (level-major), log sds, and for
// correlated blocks the unconstrained correlation parameters (tanh/stick-
// breaking rows of a unit-row-norm lower-triangular factor L); finally family
// constants (log sigma, logit zi).
//
// Constrained order (draws.csv columns): b_*, bs_*, sds_*, s_*[i], then per
// block sd_*, cor_*, r_*[level,coef], then sigma/zi.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "hierform/design/design_set.hpp"
#include "hierform/math/dual.hpp"

namespace hierform {

// Unit-row-norm lower-triangular correlation factor from unconstrained y
// (row-major order: (1,0), (2,0), (2,1), ...).  Returns the transform's
// log-Jacobian if requested.  L must hold q*q scalars (row-major).
template <class S>
inline void fill_cholesky_corr(const S* y, int q, S* L, S* log_jac) {
  using std::log;
  using std::sqrt;
  using std::tanh;
  using hierform::log;
  using hierform::sqrt;
  using hierform::tanh;
  for (int i = 0; i < q * q; ++i) L[i] = S(0.0);
  if (log_jac) *log_jac = S(0.0);
  if (q == 0) return;
  L[0] = S(1.0);
  int idx = 0;
  for (int i = 1; i < q; ++i) {
    S sum_sq(0.0);
    for (int j = 0; j < i; ++j) {
      const S z = tanh(y[idx++]);
      const S rem = S(1.0) - sum_sq;
      L[i * q + j] = z * sqrt(rem);
      if (log_jac)
        *log_jac = *log_jac + log(S(1.0) - z * z) + S(0.5) * log(rem);
      sum_sq = sum_sq + L[i * q + j] * L[i * q + j];
    }
    L[i * q + i] = sqrt(S(1.0) - sum_sq);
  }
}

struct Segment {
  enum Kind {
    Coef,        // b
    SmoothFixed, // bs
    SmoothZ,     // zs
    SmoothLogSd, // sds (log scale)
    RanZ,        // z, level-major (level*q + coef)
    RanLogSd,    // log sd per block coefficient
    RanCor,      // q(q-1)/2 unconstrained correlation parameters
    FamLogSigma,
    FamZiLogit,
  };
  Kind kind = Coef;
  std::string name;
  int offset = 0;
  int size = 0;
  int owner_idx = -1;
  int block_idx = -1;
  int smooth_idx = -1;  // index within the owner's smooth list
};

struct CSeg {
  enum Cat { B, Bs, Sds, SCoef, Sd, Cor, R, Sigma, Zi };
  Cat cat = B;
  int offset = 0;
  int size = 0;
  int owner_idx = -1;
  int block_idx = -1;
  int smooth_idx = -1;
};

class ParamSpace {
 public:
  static ParamSpace build(const DesignSet& ds) {
    ParamSpace ps;
    ps.ds_ = &ds;
    int off = 0;
    auto add = [&](Segment::Kind kind, std::string name, int size, int oi, int bi, int si) {
      Segment s;
      s.kind = kind;
      s.name = std::move(name);
      s.offset = off;
      s.size = size;
      s.owner_idx = oi;
      s.block_idx = bi;
      s.smooth_idx = si;
      off += size;
      ps.segments_.push_back(std::move(s));
    };

    for (std::size_t oi = 0; oi < ds.owners.size(); ++oi) {
      const OwnerDesign& od = ds.owners[oi];
      const std::string op = od.name == "mu" ? "" : "_" + od.name;
      if (od.fixed.X.cols() > 0)
        add(Segment::Coef, "b" + op, static_cast<int>(od.fixed.X.cols()),
            static_cast<int>(oi), -1, -1);
      for (std::size_t si = 0; si < od.smooths.size(); ++si) {
        const SmoothBlock& sm = od.smooths[si];
        add(Segment::SmoothFixed, "bs_" + sm.label, static_cast<int>(sm.Xs.cols()),
            static_cast<int>(oi), -1, static_cast<int>(si));
        add(Segment::SmoothZ, "zs_" + sm.label, static_cast<int>(sm.Zs.cols()),
            static_cast<int>(oi), -1, static_cast<int>(si));
        add(Segment::SmoothLogSd, "sds_" + sm.label, 1, static_cast<int>(oi), -1,
            static_cast<int>(si));
      }
    }

    // disambiguate repeated block labels: g, g_2, g_3, ...
    std::vector<std::string> keys;
    for (std::size_t bi = 0; bi < ds.rblocks.size(); ++bi) {
      const std::string base = ds.rblocks[bi].label;
      int count = 1;
      for (std::size_t k = 0; k < bi; ++k)
        if (ds.rblocks[k].label == base) ++count;
      keys.push_back(count == 1 ? base : base + "_" + std::to_string(count));
    }
    ps.block_keys_ = keys;

    for (std::size_t bi = 0; bi < ds.rblocks.size(); ++bi) {
      const RandomBlock& rb = ds.rblocks[bi];
      const int G = static_cast<int>(rb.levels.size());
      add(Segment::RanZ, "z_" + keys[bi], G * rb.q, -1, static_cast<int>(bi), -1);
      add(Segment::RanLogSd, "sd_" + keys[bi], rb.q, -1, static_cast<int>(bi), -1);
      if (rb.correlated && rb.q >= 2)
        add(Segment::RanCor, "L_" + keys[bi], rb.q * (rb.q - 1) / 2, -1,
            static_cast<int>(bi), -1);
    }

    for (const auto& dpar : ds.spec.constant_dpars) {
      if (dpar == "sigma")
        add(Segment::FamLogSigma, "sigma", 1, -1, -1, -1);
      else if (dpar == "zi")
        add(Segment::FamZiLogit, "zi", 1, -1, -1, -1);
    }
    ps.dim_ = off;
    ps.build_constrained();
    return ps;
  }

  int dim() const { return dim_; }
  const std::vector<Segment>& segments() const { return segments_; }
  const DesignSet& design() const { return *ds_; }
  const std::vector<std::string>& block_keys() const { return block_keys_; }

  const Segment* find_segment(Segment::Kind kind, int oi, int bi, int si) const {
    for (const auto& s : segments_)
      if (s.kind == kind && s.owner_idx == oi && s.block_idx == bi && s.smooth_idx == si)
        return &s;
    return nullptr;
  }

  int n_constrained() const { return static_cast<int>(cnames_.size()); }
  const std::vector<std::string>& constrained_names() const { return cnames_; }
  const std::vector<CSeg>& constrained_segments() const { return csegs_; }

  const CSeg* find_cseg(CSeg::Cat cat, int oi, int bi, int si) const {
    for (const auto& s : csegs_)
      if (s.cat == cat && s.owner_idx == oi && s.block_idx == bi && s.smooth_idx == si)
        return &s;
    return nullptr;
  }

  // unconstrained -> named constrained vector
  Eigen::VectorXd constrain(const Eigen::VectorXd& theta) const {
    const DesignSet& ds = *ds_;
    Eigen::VectorXd out(n_constrained());
    // scratch per block: sd, L, u
    for (const auto& cs : csegs_) {
      switch (cs.cat) {
        case CSeg::B: {
          const Segment* seg = find_segment(Segment::Coef, cs.owner_idx, -1, -1);
          out.segment(cs.offset, cs.size) = theta.segment(seg->offset, seg->size);
          break;
        }
        case CSeg::Bs: {
          const Segment* seg =
              find_segment(Segment::SmoothFixed, cs.owner_idx, -1, cs.smooth_idx);
          out.segment(cs.offset, cs.size) = theta.segment(seg->offset, seg->size);
          break;
        }
        case CSeg::Sds: {
          const Segment* seg =
              find_segment(Segment::SmoothLogSd, cs.owner_idx, -1, cs.smooth_idx);
          out[cs.offset] = std::exp(theta[seg->offset]);
          break;
        }
        case CSeg::SCoef: {
          const Segment* zseg =
              find_segment(Segment::SmoothZ, cs.owner_idx, -1, cs.smooth_idx);
          const Segment* sseg =
              find_segment(Segment::SmoothLogSd, cs.owner_idx, -1, cs.smooth_idx);
          const double sds = std::exp(theta[sseg->offset]);
          for (int i = 0; i < cs.size; ++i)
            out[cs.offset + i] = sds * theta[zseg->offset + i];
          break;
        }
        case CSeg::Sd: {
          const Segment* seg = find_segment(Segment::RanLogSd, -1, cs.block_idx, -1);
          for (int i = 0; i < cs.size; ++i)
            out[cs.offset + i] = std::exp(theta[seg->offset + i]);
          break;
        }
        case CSeg::Cor: {
          const RandomBlock& rb = ds.rblocks[static_cast<std::size_t>(cs.block_idx)];
          const Segment* yseg = find_segment(Segment::RanCor, -1, cs.block_idx, -1);
          const int q = rb.q;
          std::vector<double> L(static_cast<std::size_t>(q * q));
          fill_cholesky_corr<double>(theta.data() + yseg->offset, q, L.data(), nullptr);
          // R = L L^T; list upper off-diagonal pairs (c1 major)
          int k = 0;
          for (int c1 = 0; c1 < q - 1; ++c1)
            for (int c2 = c1 + 1; c2 < q; ++c2) {
              double r = 0;
              for (int t = 0; t <= std::min(c1, c2); ++t)
                r += L[static_cast<std::size_t>(c1 * q + t)] *
                     L[static_cast<std::size_t>(c2 * q + t)];
              out[cs.offset + k++] = r;
            }
          break;
        }
        case CSeg::R: {
          const RandomBlock& rb = ds.rblocks[static_cast<std::size_t>(cs.block_idx)];
          const Segment* zseg = find_segment(Segment::RanZ, -1, cs.block_idx, -1);
          const Segment* sseg = find_segment(Segment::RanLogSd, -1, cs.block_idx, -1);
          const Segment* yseg = find_segment(Segment::RanCor, -1, cs.block_idx, -1);
          const int q = rb.q;
          const int G = static_cast<int>(rb.levels.size());
          std::vector<double> L;
          if (yseg) {
            L.resize(static_cast<std::size_t>(q * q));
            fill_cholesky_corr<double>(theta.data() + yseg->offset, q, L.data(), nullptr);
          }
          // constrained order: coef-major, level-minor
          for (int c = 0; c < q; ++c) {
            const double sd = std::exp(theta[sseg->offset + c]);
            for (int g = 0; g < G; ++g) {
              double u;
              if (yseg) {
                u = 0;
                for (int t = 0; t <= c; ++t)
                  u += L[static_cast<std::size_t>(c * q + t)] *
                       theta[zseg->offset + g * q + t];
              } else {
                u = theta[zseg->offset + g * q + c];
              }
              out[cs.offset + c * G + g] = sd * u;
            }
          }
          break;
        }
        case CSeg::Sigma: {
          const Segment* seg = find_segment(Segment::FamLogSigma, -1, -1, -1);
          out[cs.offset] = std::exp(theta[seg->offset]);
          break;
        }
        case CSeg::Zi: {
          const Segment* seg = find_segment(Segment::FamZiLogit, -1, -1, -1);
          out[cs.offset] = inv_logit(theta[seg->offset]);
          break;
        }
      }
    }
    return out;
  }

 private:
  void build_constrained() {
    const DesignSet& ds = *ds_;
    int off = 0;
    auto add = [&](CSeg::Cat cat, int size, int oi, int bi, int si,
                   const std::vector<std::string>& names) {
      CSeg c;
      c.cat = cat;
      c.offset = off;
      c.size = size;
      c.owner_idx = oi;
      c.block_idx = bi;
      c.smooth_idx = si;
      off += size;
      csegs_.push_back(c);
      for (const auto& n : names) cnames_.push_back(n);
    };

    auto owner_prefix = [&](std::size_t oi) {
      const std::string& n = ds.owners[oi].name;
      return n == "mu" ? std::string() : n + "_";
    };

    for (std::size_t oi = 0; oi < ds.owners.size(); ++oi) {
      const OwnerDesign& od = ds.owners[oi];
      if (od.fixed.X.cols() == 0) continue;
      std::vector<std::string> names;
      for (const auto& cn : od.fixed.col_names)
        names.push_back("b_" + owner_prefix(oi) + cn);
      add(CSeg::B, static_cast<int>(names.size()), static_cast<int>(oi), -1, -1, names);
    }
    for (std::size_t oi = 0; oi < ds.owners.size(); ++oi)
      for (std::size_t si = 0; si < ds.owners[oi].smooths.size(); ++si) {
        const SmoothBlock& sm = ds.owners[oi].smooths[si];
        add(CSeg::Bs, 1, static_cast<int>(oi), -1, static_cast<int>(si),
            {"bs_" + owner_prefix(oi) + sm.label});
      }
    for (std::size_t oi = 0; oi < ds.owners.size(); ++oi)
      for (std::size_t si = 0; si < ds.owners[oi].smooths.size(); ++si) {
        const SmoothBlock& sm = ds.owners[oi].smooths[si];
        add(CSeg::Sds, 1, static_cast<int>(oi), -1, static_cast<int>(si),
            {"sds_" + owner_prefix(oi) + sm.label});
      }
    for (std::size_t oi = 0; oi < ds.owners.size(); ++oi)
      for (std::size_t si = 0; si < ds.owners[oi].smooths.size(); ++si) {
        const SmoothBlock& sm = ds.owners[oi].smooths[si];
        std::vector<std::string> names;
        for (Eigen::Index i = 0; i < sm.Zs.cols(); ++i)
          names.push_back("s_" + owner_prefix(oi) + sm.label + "[" +
                          std::to_string(i + 1) + "]");
        add(CSeg::SCoef, static_cast<int>(names.size()), static_cast<int>(oi), -1,
            static_cast<int>(si), names);
      }

    for (std::size_t bi = 0; bi < ds.rblocks.size(); ++bi) {
      const RandomBlock& rb = ds.rblocks[bi];
      std::vector<std::string> names;
      for (const auto& cn : rb.coef_names)
        names.push_back("sd_" + block_keys_[bi] + "__" + cn);
      add(CSeg::Sd, rb.q, -1, static_cast<int>(bi), -1, names);
      if (rb.correlated && rb.q >= 2) {
        std::vector<std::string> cnames;
        for (int c1 = 0; c1 < rb.q - 1; ++c1)
          for (int c2 = c1 + 1; c2 < rb.q; ++c2)
            cnames.push_back("cor_" + block_keys_[bi] + "__" +
                             rb.coef_names[static_cast<std::size_t>(c1)] + "__" +
                             rb.coef_names[static_cast<std::size_t>(c2)]);
        add(CSeg::Cor, rb.q * (rb.q - 1) / 2, -1, static_cast<int>(bi), -1, cnames);
      }
    }
    for (std::size_t bi = 0; bi < ds.rblocks.size(); ++bi) {
      const RandomBlock& rb = ds.rblocks[bi];
      std::vector<std::string> names;
      for (int c = 0; c < rb.q; ++c)
        for (const auto& lvl : rb.levels)
          names.push_back("r_" + block_keys_[bi] + "[" + lvl + "," +
                          rb.coef_names[static_cast<std::size_t>(c)] + "]");
      add(CSeg::R, rb.q * static_cast<int>(rb.levels.size()), -1, static_cast<int>(bi),
          -1, names);
    }

    for (const auto& dpar : ds.spec.constant_dpars) {
      if (dpar == "sigma") add(CSeg::Sigma, 1, -1, -1, -1, {"sigma"});
      else if (dpar == "zi") add(CSeg::Zi, 1, -1, -1, -1, {"zi"});
    }
  }

  const DesignSet* ds_ = nullptr;
  std::vector<Segment> segments_;
  std::vector<CSeg> csegs_;
  std::vector<std::string> cnames_;
  std::vector<std::string> block_keys_;
  int dim_ = 0;
};

}  // namespace hierform
