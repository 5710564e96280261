#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace emopanel {

/// The seven emotional states, in model output order.
enum class Emotion : int { neutral = 0, happy, sad, anger, disgust, surprise, fear };

inline constexpr int kNumEmotions = 7;

inline constexpr std::array<Emotion, kNumEmotions> kAllEmotions = {
    Emotion::neutral, Emotion::happy,    Emotion::sad, Emotion::anger,
    Emotion::disgust, Emotion::surprise, Emotion::fear};

std::string_view emotion_name(Emotion e);
std::optional<Emotion> emotion_from_name(std::string_view name);

/// Probability distribution over the seven emotions.
using EmotionVector = std::array<double, kNumEmotions>;

inline double& at(EmotionVector& v, Emotion e) { return v[static_cast<int>(e)]; }
inline double at(const EmotionVector& v, Emotion e) { return v[static_cast<int>(e)]; }

EmotionVector one_hot(Emotion e);

}  // namespace emopanel
