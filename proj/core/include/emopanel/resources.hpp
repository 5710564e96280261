#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "emopanel/emotion.hpp"

/// Built-in lexicons and dictionaries. These are representative subsets and
/// are written to disk by `write_default_resources` so they can be edited.
namespace emopanel::resources {

using Pairs = std::vector<std::pair<std::string, std::string>>;

const Pairs& emoticons();     // pattern -> token, e.g. ":)" -> "happyface"
const Pairs& emoji();         // UTF-8 sequence -> concatenated name
const Pairs& contractions();  // "i've" -> "i have"
/// word -> frequency, ordered by descending frequency.
const std::vector<std::pair<std::string, long>>& spell_words();

const std::map<Emotion, std::vector<std::string>>& emotion_dictionaries();
const std::vector<std::string>& fundamental_dictionary();
const std::vector<std::string>& earnings_dictionary();

/// Writes lexicons/{emoticons,emoji_map,contractions,spell_dict}.tsv and
/// dictionaries/<class>.txt, fundamental.txt, earnings.txt under `root`.
void write_default_resources(const std::string& root);

}  // namespace emopanel::resources
