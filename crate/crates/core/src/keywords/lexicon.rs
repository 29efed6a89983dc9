/// Indoor noun phrases recognised by the default rule-based extractor.
/// Includes the twelve common categories used by the Type-I/Type-II ablations.
pub const DEFAULT_LEXICON: &[&str] = &[
    // common categories
    "chair",
    "table",
    "cushion",
    "cabinet",
    "shelving",
    "sink",
    "dresser",
    "plant",
    "bed",
    "sofa",
    "counter",
    "fireplace",
    // rooms and areas
    "kitchen",
    "bedroom",
    "bathroom",
    "living room",
    "dining room",
    "family room",
    "laundry room",
    "hallway",
    "hall",
    "corridor",
    "foyer",
    "entryway",
    "closet",
    "walk-in closet",
    "office",
    "study",
    "library",
    "garage",
    "basement",
    "attic",
    "balcony",
    "porch",
    "patio",
    "deck",
    "lounge",
    "den",
    "nursery",
    "pantry",
    "gym",
    "spa",
    "sauna",
    "lobby",
    "landing",
    "staircase",
    "stairs",
    "stairway",
    "steps",
    "master bedroom",
    "guest room",
    "game room",
    "media room",
    "powder room",
    "mudroom",
    "utility room",
    "wine cellar",
    "courtyard",
    "terrace",
    "sunroom",
    "veranda",
    "yard",
    "garden",
    // furniture
    "dining table",
    "coffee table",
    "side table",
    "end table",
    "kitchen table",
    "kitchen island",
    "island",
    "desk",
    "armchair",
    "recliner",
    "stool",
    "bar stool",
    "bench",
    "ottoman",
    "couch",
    "loveseat",
    "futon",
    "bunk bed",
    "crib",
    "nightstand",
    "night stand",
    "bedside table",
    "wardrobe",
    "armoire",
    "bookshelf",
    "bookcase",
    "shelf",
    "shelves",
    "cupboard",
    "chest of drawers",
    "drawer",
    "drawers",
    "vanity",
    "console table",
    "tv stand",
    "entertainment center",
    "office chair",
    "rocking chair",
    "piano",
    "grand piano",
    "pool table",
    "ping pong table",
    "foosball table",
    "hammock",
    // fixtures
    "door",
    "doorway",
    "double doors",
    "glass door",
    "sliding door",
    "front door",
    "archway",
    "arch",
    "window",
    "windows",
    "curtain",
    "curtains",
    "blinds",
    "wall",
    "pillar",
    "column",
    "railing",
    "banister",
    "bannister",
    "rug",
    "carpet",
    "mat",
    "doormat",
    "fireplace mantel",
    "mantel",
    "chimney",
    "ceiling fan",
    "chandelier",
    "lamp",
    "floor lamp",
    "table lamp",
    "light",
    "sconce",
    "mirror",
    "painting",
    "picture",
    "poster",
    "photo",
    "clock",
    "vase",
    "statue",
    "sculpture",
    "bowl",
    "basket",
    "plant pot",
    "potted plant",
    "flowers",
    "tree",
    // kitchen and bath
    "refrigerator",
    "fridge",
    "stove",
    "oven",
    "microwave",
    "dishwasher",
    "kitchen counter",
    "countertop",
    "bar",
    "kitchen sink",
    "toilet",
    "bathtub",
    "tub",
    "shower",
    "shower door",
    "towel",
    "towel rack",
    "bathroom sink",
    "jacuzzi",
    "hot tub",
    // appliances and objects
    "television",
    "tv",
    "computer",
    "monitor",
    "speaker",
    "radiator",
    "heater",
    "washing machine",
    "washer",
    "dryer",
    "exercise bike",
    "treadmill",
    "trash can",
    "bin",
    "box",
    "boxes",
    "suitcase",
    "luggage",
    "pillow",
    "pillows",
    "blanket",
    "bed frame",
    "headboard",
    "fountain",
    "pool",
    "swimming pool",
    "elevator",
    "water heater",
    "fire extinguisher",
    "coat rack",
    "umbrella stand",
    "shoe rack",
    "ladder",
    "trophy case",
    "display case",
    "globe",
    "guitar",
    "aquarium",
];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::keywords::COMMON_CATEGORIES;

    #[test]
    fn contains_common_categories() {
        for c in COMMON_CATEGORIES {
            assert!(DEFAULT_LEXICON.contains(&c), "{c}");
        }
    }

    #[test]
    fn reasonable_size_and_normalized() {
        assert!(DEFAULT_LEXICON.len() >= 200, "{}", DEFAULT_LEXICON.len());
        for p in DEFAULT_LEXICON {
            assert_eq!(crate::keywords::normalize_keyword(p), *p);
        }
    }
}
