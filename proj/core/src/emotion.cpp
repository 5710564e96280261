#include "emopanel/emotion.hpp"

namespace emopanel {

namespace {
constexpr std::array<std::string_view, kNumEmotions> kNames = {
    "neutral", "happy", "sad", "anger", "disgust", "surprise", "fear"};
}

std::string_view emotion_name(Emotion e) { return kNames[static_cast<int>(e)]; }

std::optional<Emotion> emotion_from_name(std::string_view name) {
  for (int i = 0; i < kNumEmotions; ++i)
    if (kNames[i] == name) return static_cast<Emotion>(i);
  return std::nullopt;
}

EmotionVector one_hot(Emotion e) {
  EmotionVector v{};
  at(v, e) = 1.0;
  return v;
}

}  // namespace emopanel
