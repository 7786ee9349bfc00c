#pragma once

#include "actgan/ops.hpp"
#include "actgan/pyramid.hpp"

namespace actgan {

// Weights of the combined generator objective
// L = l_mse*L_mse + l_per*L_per + l_sty*L_sty + l_adv*L_adv.
struct LossWeights {
  double mse = 1.0;
  double per = 0.1;
  double sty = 250.0;
  double adv = 0.01;

  void validate() const {
    if (mse < 0 || per < 0 || sty < 0 || adv < 0)
      fail_invalid("loss weights must be non-negative");
  }
};

// Sum over taps of mean absolute feature distance.
template <typename T>
Tensor<T> loss_perceptual(const Tensor<T>& pred, const Tensor<T>& target,
                          const FeaturePyramid<T>& pyr) {
  if (!same_shape(pred.shape(), target.shape()))
    fail_invalid("loss_perceptual: shape mismatch");
  auto fp = pyr.taps(pred);
  auto ft = pyr.taps(target);
  Tensor<T> total = Tensor<T>::scalar(T(0));
  for (size_t i = 0; i < fp.size(); ++i)
    total = add(total, mean(actgan::abs(sub(fp[i], ft[i]))));
  return total;
}

// Mean over taps of mean absolute difference of channel Gram matrices.
template <typename T>
Tensor<T> loss_style(const Tensor<T>& pred, const Tensor<T>& target,
                     const FeaturePyramid<T>& pyr) {
  if (!same_shape(pred.shape(), target.shape())) fail_invalid("loss_style: shape mismatch");
  auto fp = pyr.taps(pred);
  auto ft = pyr.taps(target);
  Tensor<T> total = Tensor<T>::scalar(T(0));
  for (size_t i = 0; i < fp.size(); ++i)
    total = add(total, mean(actgan::abs(sub(gram_matrix(fp[i]), gram_matrix(ft[i])))));
  return scale(total, T(1) / static_cast<T>(fp.size()));
}

// Non-saturating BCE terms of the patch adversarial game. Logits are raw
// discriminator outputs; BCE(sigmoid(l), 1) = softplus(-l).
template <typename T>
Tensor<T> gan_generator_loss(const Tensor<T>& fake_logits) {
  return mean(softplus(scale(fake_logits, T(-1))));
}

template <typename T>
Tensor<T> gan_discriminator_loss(const Tensor<T>& real_logits, const Tensor<T>& fake_logits) {
  return add(mean(softplus(scale(real_logits, T(-1)))), mean(softplus(fake_logits)));
}

template <typename T>
struct TotalLoss {
  Tensor<T> total;
  double mse = 0, mse_stage1 = 0, perceptual = 0, style = 0, adversarial = 0;
};

// Combined objective on the stage-2 output plus an auxiliary MSE on stage 1
// (both stages update simultaneously from one loss).
template <typename T>
TotalLoss<T> loss_total(const Tensor<T>& pred_stage2, const Tensor<T>& pred_stage1,
                        const Tensor<T>& target, const Tensor<T>& fake_logits,
                        const FeaturePyramid<T>& pyr, const LossWeights& w) {
  w.validate();
  TotalLoss<T> out;
  auto mse2 = loss_mse(pred_stage2, target);
  auto mse1 = loss_mse(pred_stage1, target);
  auto per = loss_perceptual(pred_stage2, target, pyr);
  auto sty = loss_style(pred_stage2, target, pyr);
  auto adv = gan_generator_loss(fake_logits);
  out.mse = static_cast<double>(mse2.item());
  out.mse_stage1 = static_cast<double>(mse1.item());
  out.perceptual = static_cast<double>(per.item());
  out.style = static_cast<double>(sty.item());
  out.adversarial = static_cast<double>(adv.item());
  out.total = add(add(add(scale(mse2, static_cast<T>(w.mse)), scale(per, static_cast<T>(w.per))),
                      add(scale(sty, static_cast<T>(w.sty)), scale(adv, static_cast<T>(w.adv)))),
                  scale(mse1, static_cast<T>(w.mse)));
  return out;
}

}  // namespace actgan
