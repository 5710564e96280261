#include "emopanel/bigru.hpp"

namespace emopanel::bigru {

namespace {

void backprop_direction(const std::vector<StepCache>& steps, const GruWeights& w, GruWeights& g, Vector dh,
                        const ForwardCache& cache, Gradients& grads) {
  for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
    const StepCache& s = *it;
    const Vector one = Vector::Ones(s.z.size());

    Vector dz = dh.cwiseProduct(s.h_prev - s.n);
    Vector dn = dh.cwiseProduct(one - s.z);
    Vector dh_prev = dh.cwiseProduct(s.z);

    Vector da_n = dn.cwiseProduct(one - s.n.cwiseProduct(s.n));
    Vector rh = s.r.cwiseProduct(s.h_prev);
    g.Wxh.noalias() += s.x * da_n.transpose();
    g.Whh.noalias() += rh * da_n.transpose();
    g.bh.col(0) += da_n;
    Vector drh = w.Whh * da_n;
    Vector dr = drh.cwiseProduct(s.h_prev);
    dh_prev += drh.cwiseProduct(s.r);

    Vector da_z = dz.cwiseProduct(s.z.cwiseProduct(one - s.z));
    Vector da_r = dr.cwiseProduct(s.r.cwiseProduct(one - s.r));
    g.Wxz.noalias() += s.x * da_z.transpose();
    g.Whz.noalias() += s.h_prev * da_z.transpose();
    g.bz.col(0) += da_z;
    g.Wxr.noalias() += s.x * da_r.transpose();
    g.Whr.noalias() += s.h_prev * da_r.transpose();
    g.br.col(0) += da_r;
    dh_prev.noalias() += w.Whz * da_z + w.Whr * da_r;

    Vector dx = w.Wxz * da_z + w.Wxr * da_r + w.Wxh * da_n;
    if (cache.mask.size() > 0) dx = dx.cwiseProduct(cache.mask.row(static_cast<Eigen::Index>(s.t)).transpose());
    text::TokenId id = cache.ids[s.t];
    auto e = grads.embed.find(id);
    if (e == grads.embed.end())
      grads.embed.emplace(id, dx);
    else
      e->second += dx;

    dh = std::move(dh_prev);
  }
}

}  // namespace

Gradients backward(const ForwardCache& c, const ModelParams& p, std::size_t target) {
  if (target >= static_cast<std::size_t>(c.probs.size())) throw InvalidArgument("backward: target out of range");
  Gradients g = Gradients::zeros_like(p);
  ModelParams& d = g.dense;

  Vector dlogits = c.probs;
  dlogits(static_cast<Eigen::Index>(target)) -= 1.0;

  d.Wy.noalias() = c.D2 * dlogits.transpose();
  d.by.col(0) = dlogits;
  Vector dD2 = (p.Wy * dlogits).cwiseProduct((c.D2pre.array() > 0).cast<double>().matrix());

  d.Wd.noalias() = c.D * dD2.transpose();
  d.bd.col(0) = dD2;
  Vector dD = (p.Wd * dD2).cwiseProduct((c.Dpre.array() > 0).cast<double>().matrix());

  d.Wo.noalias() = c.O * dD.transpose();
  d.bo.col(0) = dD;
  Vector dO = p.Wo * dD;

  d.Whq.noalias() = c.H * dO.transpose();
  d.bq.col(0) = dO;
  Vector dH = p.Whq * dO;

  const auto h = p.fwd.Whz.rows();
  backprop_direction(c.fwd, p.fwd, d.fwd, dH.head(h), c, g);
  backprop_direction(c.bwd, p.bwd, d.bwd, dH.tail(h), c, g);
  return g;
}

}  // namespace emopanel::bigru
