#pragma once

#include <cstdint>
#include <unordered_map>

namespace crisiskit {

/// Bundled emoji -> shortcode table (codepoint keyed, github-style names).
/// Emoji not listed here pass through normalization unchanged.
inline const std::unordered_map<std::uint32_t, const char*>& emoji_shortcodes() {
  static const std::unordered_map<std::uint32_t, const char*> table = {
      // faces
      {0x1F600, "grinning"},
      {0x1F601, "grin"},
      {0x1F602, "joy"},
      {0x1F603, "smiley"},
      {0x1F604, "smile"},
      {0x1F605, "sweat_smile"},
      {0x1F606, "laughing"},
      {0x1F607, "innocent"},
      {0x1F608, "smiling_imp"},
      {0x1F609, "wink"},
      {0x1F60A, "blush"},
      {0x1F60B, "yum"},
      {0x1F60C, "relieved"},
      {0x1F60D, "heart_eyes"},
      {0x1F60E, "sunglasses"},
      {0x1F60F, "smirk"},
      {0x1F610, "neutral_face"},
      {0x1F611, "expressionless"},
      {0x1F612, "unamused"},
      {0x1F613, "sweat"},
      {0x1F614, "pensive"},
      {0x1F615, "confused"},
      {0x1F616, "confounded"},
      {0x1F617, "kissing"},
      {0x1F618, "kissing_heart"},
      {0x1F619, "kissing_smiling_eyes"},
      {0x1F61A, "kissing_closed_eyes"},
      {0x1F61B, "stuck_out_tongue"},
      {0x1F61C, "stuck_out_tongue_winking_eye"},
      {0x1F61D, "stuck_out_tongue_closed_eyes"},
      {0x1F61E, "disappointed"},
      {0x1F61F, "worried"},
      {0x1F620, "angry"},
      {0x1F621, "rage"},
      {0x1F622, "cry"},
      {0x1F623, "persevere"},
      {0x1F624, "triumph"},
      {0x1F625, "disappointed_relieved"},
      {0x1F626, "frowning"},
      {0x1F627, "anguished"},
      {0x1F628, "fearful"},
      {0x1F629, "weary"},
      {0x1F62A, "sleepy"},
      {0x1F62B, "tired_face"},
      {0x1F62C, "grimacing"},
      {0x1F62D, "sob"},
      {0x1F62E, "open_mouth"},
      {0x1F62F, "hushed"},
      {0x1F630, "cold_sweat"},
      {0x1F631, "scream"},
      {0x1F632, "astonished"},
      {0x1F633, "flushed"},
      {0x1F634, "sleeping"},
      {0x1F635, "dizzy_face"},
      {0x1F636, "no_mouth"},
      {0x1F637, "mask"},
      {0x1F641, "slightly_frowning_face"},
      {0x1F642, "slightly_smiling_face"},
      {0x1F643, "upside_down_face"},
      {0x1F644, "face_with_rolling_eyes"},
      {0x1F910, "zipper_mouth_face"},
      {0x1F912, "face_with_thermometer"},
      {0x1F913, "nerd_face"},
      {0x1F914, "thinking"},
      {0x1F915, "face_with_head_bandage"},
      {0x1F917, "hugs"},
      {0x1F920, "cowboy_hat_face"},
      {0x1F922, "nauseated_face"},
      {0x1F923, "rofl"},
      {0x1F924, "drooling_face"},
      {0x1F925, "lying_face"},
      {0x1F927, "sneezing_face"},
      {0x1F928, "raised_eyebrow"},
      {0x1F929, "star_struck"},
      {0x1F92D, "hand_over_mouth"},
      {0x1F92E, "vomiting_face"},
      {0x1F92F, "exploding_head"},
      {0x1F970, "smiling_face_with_three_hearts"},
      {0x1F971, "yawning_face"},
      {0x1F972, "smiling_face_with_tear"},
      {0x1F973, "partying_face"},
      {0x1F974, "woozy_face"},
      {0x1F975, "hot_face"},
      {0x1F976, "cold_face"},
      {0x1F97A, "pleading_face"},
      {0x2639, "frowning_face"},
      {0x263A, "relaxed"},
      // hearts
      {0x2764, "heart"},
      {0x2763, "heavy_heart_exclamation"},
      {0x1F493, "heartbeat"},
      {0x1F494, "broken_heart"},
      {0x1F495, "two_hearts"},
      {0x1F496, "sparkling_heart"},
      {0x1F497, "heartpulse"},
      {0x1F498, "cupid"},
      {0x1F499, "blue_heart"},
      {0x1F49A, "green_heart"},
      {0x1F49B, "yellow_heart"},
      {0x1F49C, "purple_heart"},
      {0x1F49D, "gift_heart"},
      {0x1F49E, "revolving_hearts"},
      {0x1F49F, "heart_decoration"},
      {0x1F5A4, "black_heart"},
      {0x1F90D, "white_heart"},
      {0x1F90E, "brown_heart"},
      {0x1F9E1, "orange_heart"},
      // hands and people
      {0x1F44B, "wave"},
      {0x1F44C, "ok_hand"},
      {0x1F44D, "thumbsup"},
      {0x1F44E, "thumbsdown"},
      {0x1F44F, "clap"},
      {0x1F446, "point_up_2"},
      {0x1F447, "point_down"},
      {0x1F448, "point_left"},
      {0x1F449, "point_right"},
      {0x1F450, "open_hands"},
      {0x1F4AA, "muscle"},
      {0x1F591, "raised_hand_with_fingers_splayed"},
      {0x1F595, "middle_finger"},
      {0x1F64C, "raised_hands"},
      {0x1F64F, "pray"},
      {0x1F91D, "handshake"},
      {0x1F91E, "crossed_fingers"},
      {0x1F932, "palms_up_together"},
      {0x270A, "fist"},
      {0x270B, "raised_hand"},
      {0x270C, "v"},
      {0x270D, "writing_hand"},
      {0x1F468, "man"},
      {0x1F469, "woman"},
      {0x1F476, "baby"},
      {0x1F46A, "family"},
      {0x1F46E, "police_officer"},
      {0x1F477, "construction_worker"},
      {0x1F9D1, "person"},
      {0x1F440, "eyes"},
      {0x1F442, "ear"},
      {0x1F443, "nose"},
      // crisis and weather
      {0x1F691, "ambulance"},
      {0x1F692, "fire_engine"},
      {0x1F693, "police_car"},
      {0x1F3E5, "hospital"},
      {0x1F6A8, "rotating_light"},
      {0x1F6D1, "stop_sign"},
      {0x1F198, "sos"},
      {0x26A0, "warning"},
      {0x1F525, "fire"},
      {0x1F9EF, "fire_extinguisher"},
      {0x1F30A, "ocean"},
      {0x1F327, "cloud_with_rain"},
      {0x1F328, "cloud_with_snow"},
      {0x1F329, "cloud_with_lightning"},
      {0x26C8, "cloud_with_lightning_and_rain"},
      {0x1F32A, "tornado"},
      {0x1F32B, "fog"},
      {0x1F300, "cyclone"},
      {0x1F30B, "volcano"},
      {0x26A1, "zap"},
      {0x2744, "snowflake"},
      {0x1F4A5, "boom"},
      {0x1F4A6, "sweat_drops"},
      {0x1F4A7, "droplet"},
      {0x1F4A8, "dash"},
      {0x1F30D, "earth_africa"},
      {0x1F30E, "earth_americas"},
      {0x1F30F, "earth_asia"},
      {0x1F3E0, "house"},
      {0x1F3E1, "house_with_garden"},
      {0x1F3DA, "derelict_house"},
      {0x26D1, "rescue_worker_helmet"},
      {0x1FA78, "drop_of_blood"},
      {0x1FA79, "adhesive_bandage"},
      {0x1F48A, "pill"},
      {0x1F489, "syringe"},
      {0x1F9EA, "test_tube"},
      {0x1F9EC, "dna"},
      {0x1F9A0, "microbe"},
      {0x1F9BA, "safety_vest"},
      {0x1F9F7, "safety_pin"},
      {0x26EA, "church"},
      {0x1F54C, "mosque"},
      // food and money
      {0x1F34C, "banana"},
      {0x1F34E, "apple"},
      {0x1F355, "pizza"},
      {0x1F35A, "rice"},
      {0x1F35E, "bread"},
      {0x1F371, "bento"},
      {0x1F372, "stew"},
      {0x1F37C, "baby_bottle"},
      {0x1F957, "green_salad"},
      {0x1F95B, "milk_glass"},
      {0x1F96B, "canned_food"},
      {0x1F9C3, "beverage_box"},
      {0x1F4B0, "moneybag"},
      {0x1F4B3, "credit_card"},
      {0x1F4B4, "yen"},
      {0x1F4B5, "dollar"},
      {0x1F4B6, "euro"},
      {0x1F4B7, "pound"},
      {0x1F4B8, "money_with_wings"},
      {0x1FA99, "coin"},
      // transport
      {0x1F680, "rocket"},
      {0x1F697, "red_car"},
      {0x1F68C, "bus"},
      {0x1F686, "train2"},
      {0x1F6A2, "ship"},
      {0x26F5, "sailboat"},
      {0x1F6F6, "canoe"},
      {0x2708, "airplane"},
      {0x1F6E9, "small_airplane"},
      // symbols
      {0x2705, "white_check_mark"},
      {0x274C, "x"},
      {0x274E, "negative_squared_cross_mark"},
      {0x2757, "exclamation"},
      {0x2753, "question"},
      {0x203C, "bangbang"},
      {0x2049, "interrobang"},
      {0x1F389, "tada"},
      {0x1F38A, "confetti_ball"},
      {0x1F381, "gift"},
      {0x2B50, "star"},
      {0x1F31F, "star2"},
      {0x2728, "sparkles"},
      {0x1F4AF, "100"},
      {0x1F4E2, "loudspeaker"},
      {0x1F4E3, "mega"},
      {0x1F4F1, "iphone"},
      {0x1F4DE, "telephone_receiver"},
      {0x260E, "phone"},
      {0x2709, "envelope"},
      {0x1F4E7, "email"},
      {0x1F4E9, "envelope_with_arrow"},
      {0x1F4E6, "package"},
      {0x1F4CC, "pushpin"},
      {0x1F4CD, "round_pushpin"},
      {0x1F5FA, "world_map"},
      {0x1F9ED, "compass"},
      {0x23F0, "alarm_clock"},
      {0x231A, "watch"},
      {0x2600, "sunny"},
      {0x1F308, "rainbow"},
      {0x1F315, "full_moon"},
      {0x1F319, "crescent_moon"},
      {0x2614, "umbrella"},
      {0x1F302, "closed_umbrella"},
      {0x1F4F0, "newspaper"},
      {0x1F4FA, "tv"},
      {0x1F4FB, "radio"},
      {0x1F50B, "battery"},
      {0x1F526, "flashlight"},
      {0x1F56F, "candle"},
      {0x1F6CF, "bed"},
      {0x1F6BF, "shower"},
      {0x1F6BD, "toilet"},
      {0x1F9F9, "broom"},
      {0x1F9F0, "toolbox"},
      {0x1F527, "wrench"},
      {0x1F528, "hammer"},
      {0x26CF, "pick"},
      {0x1F9F1, "bricks"},
      {0x1FAA8, "rock"},
      {0x1F333, "deciduous_tree"},
      {0x1F33E, "sheaf_of_rice"},
      {0x1F408, "cat2"},
      {0x1F415, "dog2"},
      {0x1F411, "sheep"},
      {0x1F414, "chicken"},
      {0x1F426, "bird"},
      {0x1F41F, "fish"},
      {0x27A1, "arrow_right"},
      {0x2B05, "arrow_left"},
      {0x2B06, "arrow_up"},
      {0x2B07, "arrow_down"},
  };
  return table;
}

}  // namespace crisiskit
