// Bundled lookup tables for the text pipeline. Emoji names follow the
// Unicode character names, lowercased with '_' separators.

#include <fstream>
#include <sstream>

#include "toxcascade/errors.hpp"
#include "toxcascade/textprep.hpp"
#include "utf8.hpp"

namespace toxcascade::textprep {
namespace {

struct EmojiRow {
  char32_t cp;
  const char* name;
};

constexpr EmojiRow kEmoji[] = {
    {0x1F600, "grinning_face"},
    {0x1F601, "grinning_face_with_smiling_eyes"},
    {0x1F602, "face_with_tears_of_joy"},
    {0x1F603, "smiling_face_with_open_mouth"},
    {0x1F604, "smiling_face_with_open_mouth_and_smiling_eyes"},
    {0x1F605, "smiling_face_with_open_mouth_and_cold_sweat"},
    {0x1F606, "smiling_face_with_open_mouth_and_tightly_closed_eyes"},
    {0x1F607, "smiling_face_with_halo"},
    {0x1F608, "smiling_face_with_horns"},
    {0x1F609, "winking_face"},
    {0x1F60A, "smiling_face_with_smiling_eyes"},
    {0x1F60B, "face_savouring_delicious_food"},
    {0x1F60C, "relieved_face"},
    {0x1F60D, "smiling_face_with_heart_shaped_eyes"},
    {0x1F60E, "smiling_face_with_sunglasses"},
    {0x1F60F, "smirking_face"},
    {0x1F610, "neutral_face"},
    {0x1F611, "expressionless_face"},
    {0x1F612, "unamused_face"},
    {0x1F613, "face_with_cold_sweat"},
    {0x1F614, "pensive_face"},
    {0x1F615, "confused_face"},
    {0x1F616, "confounded_face"},
    {0x1F617, "kissing_face"},
    {0x1F618, "face_throwing_a_kiss"},
    {0x1F619, "kissing_face_with_smiling_eyes"},
    {0x1F61A, "kissing_face_with_closed_eyes"},
    {0x1F61B, "face_with_stuck_out_tongue"},
    {0x1F61C, "face_with_stuck_out_tongue_and_winking_eye"},
    {0x1F61D, "face_with_stuck_out_tongue_and_tightly_closed_eyes"},
    {0x1F61E, "disappointed_face"},
    {0x1F61F, "worried_face"},
    {0x1F620, "angry_face"},
    {0x1F621, "pouting_face"},
    {0x1F622, "crying_face"},
    {0x1F623, "persevering_face"},
    {0x1F624, "face_with_look_of_triumph"},
    {0x1F625, "disappointed_but_relieved_face"},
    {0x1F626, "frowning_face_with_open_mouth"},
    {0x1F627, "anguished_face"},
    {0x1F628, "fearful_face"},
    {0x1F629, "weary_face"},
    {0x1F62A, "sleepy_face"},
    {0x1F62B, "tired_face"},
    {0x1F62C, "grimacing_face"},
    {0x1F62D, "loudly_crying_face"},
    {0x1F62E, "face_with_open_mouth"},
    {0x1F62F, "hushed_face"},
    {0x1F630, "face_with_open_mouth_and_cold_sweat"},
    {0x1F631, "face_screaming_in_fear"},
    {0x1F632, "astonished_face"},
    {0x1F633, "flushed_face"},
    {0x1F634, "sleeping_face"},
    {0x1F635, "dizzy_face"},
    {0x1F636, "face_without_mouth"},
    {0x1F637, "face_with_medical_mask"},
    {0x1F638, "grinning_cat_face_with_smiling_eyes"},
    {0x1F639, "cat_face_with_tears_of_joy"},
    {0x1F63A, "smiling_cat_face_with_open_mouth"},
    {0x1F63B, "smiling_cat_face_with_heart_shaped_eyes"},
    {0x1F63C, "cat_face_with_wry_smile"},
    {0x1F63D, "kissing_cat_face_with_closed_eyes"},
    {0x1F63E, "pouting_cat_face"},
    {0x1F63F, "crying_cat_face"},
    {0x1F640, "weary_cat_face"},
    {0x1F641, "slightly_frowning_face"},
    {0x1F642, "slightly_smiling_face"},
    {0x1F643, "upside_down_face"},
    {0x1F644, "face_with_rolling_eyes"},
    {0x1F645, "face_with_no_good_gesture"},
    {0x1F646, "face_with_ok_gesture"},
    {0x1F647, "person_bowing_deeply"},
    {0x1F648, "see_no_evil_monkey"},
    {0x1F649, "hear_no_evil_monkey"},
    {0x1F64A, "speak_no_evil_monkey"},
    {0x1F64B, "happy_person_raising_one_hand"},
    {0x1F64C, "person_raising_both_hands_in_celebration"},
    {0x1F64D, "person_frowning"},
    {0x1F64E, "person_with_pouting_face"},
    {0x1F64F, "person_with_folded_hands"},
    {0x1F910, "zipper_mouth_face"},
    {0x1F911, "money_mouth_face"},
    {0x1F912, "face_with_thermometer"},
    {0x1F913, "nerd_face"},
    {0x1F914, "thinking_face"},
    {0x1F915, "face_with_head_bandage"},
    {0x1F916, "robot_face"},
    {0x1F917, "hugging_face"},
    {0x1F918, "sign_of_the_horns"},
    {0x1F919, "call_me_hand"},
    {0x1F91A, "raised_back_of_hand"},
    {0x1F91B, "left_facing_fist"},
    {0x1F91C, "right_facing_fist"},
    {0x1F91D, "handshake"},
    {0x1F91E, "hand_with_index_and_middle_fingers_crossed"},
    {0x1F91F, "i_love_you_hand_sign"},
    {0x1F920, "face_with_cowboy_hat"},
    {0x1F921, "clown_face"},
    {0x1F922, "nauseated_face"},
    {0x1F923, "rolling_on_the_floor_laughing"},
    {0x1F924, "drooling_face"},
    {0x1F925, "lying_face"},
    {0x1F926, "face_palm"},
    {0x1F927, "sneezing_face"},
    {0x1F928, "face_with_one_eyebrow_raised"},
    {0x1F929, "grinning_face_with_star_eyes"},
    {0x1F92A, "grinning_face_with_one_large_and_one_small_eye"},
    {0x1F92B, "face_with_finger_covering_closed_lips"},
    {0x1F92C, "serious_face_with_symbols_covering_mouth"},
    {0x1F92D, "smiling_face_with_smiling_eyes_and_hand_covering_mouth"},
    {0x1F92E, "face_with_open_mouth_vomiting"},
    {0x1F92F, "shocked_face_with_exploding_head"},
    {0x1F970, "smiling_face_with_smiling_eyes_and_three_hearts"},
    {0x1F971, "yawning_face"},
    {0x1F972, "smiling_face_with_tear"},
    {0x1F973, "face_with_party_horn_and_party_hat"},
    {0x1F974, "face_with_uneven_eyes_and_wavy_mouth"},
    {0x1F975, "overheated_face"},
    {0x1F976, "freezing_face"},
    {0x1F977, "ninja"},
    {0x1F978, "disguised_face"},
    {0x1F97A, "face_with_pleading_eyes"},
    {0x2764, "red_heart"},
    {0x1F494, "broken_heart"},
    {0x1F495, "two_hearts"},
    {0x1F496, "sparkling_heart"},
    {0x1F497, "growing_heart"},
    {0x1F498, "heart_with_arrow"},
    {0x1F499, "blue_heart"},
    {0x1F49A, "green_heart"},
    {0x1F49B, "yellow_heart"},
    {0x1F49C, "purple_heart"},
    {0x1F5A4, "black_heart"},
    {0x1F44D, "thumbs_up_sign"},
    {0x1F44E, "thumbs_down_sign"},
    {0x1F44C, "ok_hand_sign"},
    {0x1F44F, "clapping_hands_sign"},
    {0x1F44A, "fisted_hand_sign"},
    {0x1F44B, "waving_hand_sign"},
    {0x1F595, "reversed_hand_with_middle_finger_extended"},
    {0x1F4AA, "flexed_biceps"},
    {0x1F525, "fire"},
    {0x1F480, "skull"},
    {0x2620, "skull_and_crossbones"},
    {0x1F4A9, "pile_of_poo"},
    {0x1F47B, "ghost"},
    {0x1F47D, "extraterrestrial_alien"},
    {0x1F4AF, "hundred_points_symbol"},
    {0x1F4A2, "anger_symbol"},
    {0x1F4A5, "collision_symbol"},
    {0x1F4A4, "sleeping_symbol"},
    {0x1F440, "eyes"},
    {0x1F3C6, "trophy"},
    {0x1F3AE, "video_game"},
    {0x1F40D, "snake"},
    {0x1F400, "rat"},
    {0x1F437, "pig_face"},
    {0x1F412, "monkey"},
    {0x1F6AE, "put_litter_in_its_place_symbol"},
    {0x1F52B, "pistol"},
    {0x1F5E1, "dagger_knife"},
    {0x1F4A3, "bomb"},
    {0x1F90C, "pinched_fingers"},
    {0x1F937, "shrug"},
    {0x2705, "white_heavy_check_mark"},
    {0x274C, "cross_mark"},
    {0x26A0, "warning_sign"},
    {0x1F197, "squared_ok"},
    {0x1F198, "squared_sos"},
    {0x1F4B0, "money_bag"},
    {0x1F389, "party_popper"},
    {0x1F38A, "confetti_ball"},
    {0x1F3AF, "direct_hit"},
    {0x1F947, "first_place_medal"},
    {0x2B50, "white_medium_star"},
    {0x1F31F, "glowing_star"},
    {0x2728, "sparkles"},
};

struct Pair {
  const char* key;
  const char* value;
};

// Standalone emoticons, matched case-insensitively as whole whitespace-delimited chunks.
constexpr Pair kEmoticons[] = {
    {":)", "slightly_smiling_face"}, {":-)", "slightly_smiling_face"}, {"(:", "slightly_smiling_face"},
    {":(", "slightly_frowning_face"}, {":-(", "slightly_frowning_face"}, {"):", "slightly_frowning_face"},
    {":d", "grinning_face"}, {":-d", "grinning_face"}, {";)", "winking_face"}, {";-)", "winking_face"},
    {":p", "face_with_stuck_out_tongue"}, {":-p", "face_with_stuck_out_tongue"},
    {":o", "face_with_open_mouth"}, {":-o", "face_with_open_mouth"}, {":'(", "crying_face"},
    {":|", "neutral_face"}, {":-|", "neutral_face"}, {":/", "confused_face"}, {":-/", "confused_face"},
    {"<3", "red_heart"}, {"</3", "broken_heart"}, {"xd", "grinning_squinting_face"},
    {">:(", "angry_face"}, {">:)", "smiling_face_with_horns"}, {"8)", "smiling_face_with_sunglasses"},
    {"b)", "smiling_face_with_sunglasses"}, {"o_o", "face_with_open_mouth"}, {"-_-", "expressionless_face"},
    {"^^", "smiling_face_with_smiling_eyes"}, {"^_^", "smiling_face_with_smiling_eyes"},
    {"t_t", "loudly_crying_face"}, {";(", "crying_face"}, {":*", "face_throwing_a_kiss"},
};

constexpr Pair kContractions[] = {
    {"ain't", "am not"}, {"aren't", "are not"}, {"can't", "cannot"}, {"can't've", "cannot have"},
    {"could've", "could have"}, {"couldn't", "could not"}, {"couldn't've", "could not have"},
    {"didn't", "did not"}, {"doesn't", "does not"}, {"don't", "do not"}, {"hadn't", "had not"},
    {"hadn't've", "had not have"}, {"hasn't", "has not"}, {"haven't", "have not"}, {"he'd", "he would"},
    {"he'd've", "he would have"}, {"he'll", "he will"}, {"he's", "he is"}, {"how'd", "how did"},
    {"how'll", "how will"}, {"how's", "how is"}, {"i'd", "i would"}, {"i'd've", "i would have"},
    {"i'll", "i will"}, {"i'll've", "i will have"}, {"i'm", "i am"}, {"i've", "i have"},
    {"isn't", "is not"}, {"it'd", "it would"}, {"it'd've", "it would have"}, {"it'll", "it will"},
    {"it's", "it is"}, {"let's", "let us"}, {"ma'am", "madam"}, {"mayn't", "may not"},
    {"might've", "might have"}, {"mightn't", "might not"}, {"must've", "must have"},
    {"mustn't", "must not"}, {"needn't", "need not"}, {"o'clock", "of the clock"},
    {"oughtn't", "ought not"}, {"shan't", "shall not"}, {"she'd", "she would"},
    {"she'd've", "she would have"}, {"she'll", "she will"}, {"she's", "she is"},
    {"should've", "should have"}, {"shouldn't", "should not"}, {"shouldn't've", "should not have"},
    {"so've", "so have"}, {"so's", "so is"}, {"that'd", "that would"}, {"that'd've", "that would have"},
    {"that's", "that is"}, {"there'd", "there would"}, {"there'd've", "there would have"},
    {"there's", "there is"}, {"there're", "there are"}, {"they'd", "they would"},
    {"they'd've", "they would have"}, {"they'll", "they will"}, {"they'll've", "they will have"},
    {"they're", "they are"}, {"they've", "they have"}, {"to've", "to have"}, {"wasn't", "was not"},
    {"we'd", "we would"}, {"we'd've", "we would have"}, {"we'll", "we will"}, {"we'll've", "we will have"},
    {"we're", "we are"}, {"we've", "we have"}, {"weren't", "were not"}, {"what'll", "what will"},
    {"what'll've", "what will have"}, {"what're", "what are"}, {"what's", "what is"},
    {"what've", "what have"}, {"when's", "when is"}, {"when've", "when have"}, {"where'd", "where did"},
    {"where's", "where is"}, {"where've", "where have"}, {"who'll", "who will"},
    {"who'll've", "who will have"}, {"who's", "who is"}, {"who've", "who have"}, {"who'd", "who would"},
    {"who're", "who are"}, {"why's", "why is"}, {"why've", "why have"}, {"why'd", "why did"},
    {"will've", "will have"}, {"won't", "will not"}, {"won't've", "will not have"},
    {"would've", "would have"}, {"wouldn't", "would not"}, {"wouldn't've", "would not have"},
    {"y'all", "you all"}, {"y'all'd", "you all would"}, {"y'all're", "you all are"},
    {"y'all've", "you all have"}, {"you'd", "you would"}, {"you'd've", "you would have"},
    {"you'll", "you will"}, {"you'll've", "you will have"}, {"you're", "you are"},
    {"you've", "you have"}, {"here's", "here is"}, {"how're", "how are"}, {"why're", "why are"},
    {"where're", "where are"}, {"gonna", "going to"}, {"gotta", "got to"}, {"wanna", "want to"},
    {"dunno", "do not know"}, {"c'mon", "come on"}, {"'cause", "because"}, {"daren't", "dare not"},
    {"everyone's", "everyone is"}, {"nobody's", "nobody is"}, {"somebody's", "somebody is"},
    {"someone's", "someone is"}, {"this's", "this is"}, {"those're", "those are"},
};

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

template <typename F>
void read_tsv(const std::string& path, F&& on_row) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open table file: " + path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw FormatError(path + ":" + std::to_string(lineno) + ": expected key<TAB>value");
    }
    on_row(trim(line.substr(0, tab)), trim(line.substr(tab + 1)));
  }
}

char32_t parse_emoji_key(const std::string& key, const std::string& path) {
  if (key.size() > 2 && (key[0] == 'U' || key[0] == 'u') && key[1] == '+') {
    return static_cast<char32_t>(std::stoul(key.substr(2), nullptr, 16));
  }
  const std::string clean = sanitize_utf8(key);
  if (clean.empty()) throw FormatError(path + ": empty emoji key");
  return utf8::decode(clean, 0).cp;
}

}  // namespace

const TextTables& TextTables::bundled() {
  static const TextTables tables = [] {
    TextTables t;
    for (const auto& row : kEmoji) t.emoji.emplace(row.cp, row.name);
    for (const auto& p : kEmoticons) t.emoticons.emplace(p.key, p.value);
    for (const auto& p : kContractions) t.contractions.emplace(p.key, p.value);
    return t;
  }();
  return tables;
}

TextTables TextTables::load(const PrepConfig& cfg) {
  TextTables t = bundled();
  if (!cfg.emoji_table_path.empty()) {
    read_tsv(cfg.emoji_table_path, [&](const std::string& k, const std::string& v) {
      t.emoji[parse_emoji_key(k, cfg.emoji_table_path)] = to_lower(v);
    });
  }
  if (!cfg.contraction_table_path.empty()) {
    read_tsv(cfg.contraction_table_path, [&](const std::string& k, const std::string& v) {
      t.contractions[to_lower(k)] = to_lower(v);
    });
  }
  return t;
}

}  // namespace toxcascade::textprep
