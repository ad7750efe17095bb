"""Reference S-box tables published with the lightning-TRNG construction.

All tables are row-major 16x16 grids flattened to 256 entries.
"""

# Walk-constructed S-box, published nonlinearity score 105.
SBOX_1A = (
    155, 253,  60, 189,  42, 238,  93, 209, 202, 129, 164,  75, 240,  85, 151, 254,
     44, 138, 251,  28, 223, 230,  95,  62, 231, 121, 149,  31, 180,  57, 161,  73,
    203,  72,  84, 227, 218, 210,  56, 243, 245, 190, 135,   9,  69, 255, 219, 166,
    140, 198, 239, 225, 250, 143, 120,  63, 134, 103, 186, 207,   2,  64,  27, 144,
    241,  37, 108,  92,  98,  65, 220,  79,   4, 249, 228,  24, 205,  10, 102, 156,
      8, 122, 119, 185, 188,  58, 236, 216, 226,  17, 217,  13,  35, 237,  78, 242,
     80,  33, 127, 125,  14,  83, 192,  66, 221, 169,  48, 112,  59, 100, 146,  74,
    199,  97, 141,  52, 173, 107, 224,  68,  55, 152, 247, 110, 157, 181, 170, 196,
    131,  32, 104,  86,  96, 128,  50, 208, 158, 244, 214, 159, 234, 142,  22, 118,
     81,  43,   6,  89, 187,   7, 177,  67, 204, 171,   5, 235, 195, 123,   0, 139,
    109,   3, 178, 172,  18,  54,  76,  53,  99,  88, 212,  46,  21,  39,  15, 201,
    101,  87, 246, 184, 165, 233, 105, 179, 232, 206,  49,  70, 252, 126, 191, 147,
    114,  71, 229,  26,   1,  29, 132, 248,  91, 154,  25, 211,  16, 106,  34, 111,
    116, 183, 168, 117, 193,  51,  47, 137, 115, 200, 174, 153, 133,  20, 213, 194,
     45,  40, 124, 150, 130,  11,  77, 175,  12, 222,  19, 160,  30, 182,  82,  41,
     61, 113,  36, 167,  38, 136, 145, 163,  90,  94, 162,  23, 215, 176, 197, 148,
)

# Walk-constructed S-box, published nonlinearity score 104.
SBOX_1B = (
    211, 238,  81, 126,  89, 185, 244,  26, 139, 143,  23,  73, 209, 102, 132, 120,
     34, 174,  78, 159, 165, 114, 138, 181,  10,  28, 221, 250,  44, 189, 110, 191,
    155, 128, 223,  75, 164,  72, 214, 108,  25, 245, 201, 213,   2, 109, 178, 144,
    216,  96, 123, 196, 197, 121, 150,  86,  35, 169,  27,  90, 166, 163,  56, 158,
    117, 147,  15,   6,  47,  17, 100, 252,  57,  79, 156, 212, 198, 218, 131, 162,
    101, 186,  30, 104, 242, 202, 146, 122, 133, 253, 103, 130,  87,  16, 192, 168,
     54, 205, 125, 149,  33, 107, 153,  32, 129, 179,  12, 173, 251, 157, 195,  42,
    224, 227,  20, 207, 180,  36, 145,  84, 231, 200, 255,  61,  97,  43, 170,  91,
     11,  49, 210, 148, 204,  24,  13, 215,  52,  46, 183, 193, 171, 154, 222,  88,
    137,  94,  85,  40, 167,  95, 140,  45, 106, 237,  99,  74, 234, 175,  21, 151,
      4, 119,  77, 184, 105,  92,  83, 243, 177, 226,  51, 134,  39, 182,  68, 236,
     82, 118, 248,   0,  70, 247,  55,  67,  37,   8, 230, 136,  48, 208, 188, 142,
     41, 232, 246, 235,  71, 113, 127,  69,   5, 116,  22, 249,  64,  80,  93,  50,
     53, 219,   1, 161,  76, 160, 172, 176, 225,  63, 152, 254, 187, 115,  98, 239,
     31,  29,  62, 220,  18, 112, 206, 194, 229, 241, 240, 217, 228, 111, 141,  38,
    135, 203,   3, 233,  19,  65,  14, 190, 199,  58,  66,  59,  60,   9, 124,   7,
)

# GA-optimized S-box, published nonlinearity score 108.
SBOX_1C = (
    162,   5, 201, 199, 126, 220, 204,   9, 155, 242,   2,  39, 166, 221, 133,  15,
     63, 192,  73, 164, 254,  23,  11, 185, 247,  34,  98, 149,  40,  22,  96,  33,
    176,  75, 113,  53,  50, 165,  44,  29, 132, 156, 169, 206, 225,  85,   0, 208,
     36, 103,  64, 218, 198, 122, 137, 136, 104, 159, 118,  88, 154,  32, 193,  57,
    183, 135, 160,  24, 228, 152, 234, 172,  17, 177, 232,  70, 175, 210,  14,  31,
    142, 188, 227, 141, 151,  76, 219, 131, 119, 197, 212, 251,  65, 100,  97, 145,
    190,  68, 158, 110, 214,  61, 146, 116,   3, 238, 101,  49, 181,  54, 239,  92,
    179, 147,  30, 143, 109, 170, 223, 215, 157,  51, 250, 106, 153,  13, 241,  79,
    129, 140,  78,  18, 248,   6, 196, 252,  58,  89, 184, 134, 115,  59, 203, 124,
     81, 112, 195,  84,  74, 235,  82,  28, 105, 243, 237, 230,  95, 173,  80,  94,
    138,  83,  66,  12,  38,  45,  87,  10, 191, 121,  86,  99, 189, 217, 249, 168,
    236, 102, 231,   1, 205, 107,  62, 202, 233, 253,  27,  56, 144,  72,   8, 125,
    167,  55, 128,  25, 255, 229, 187, 178,  35, 246, 171, 226,  26, 240,  47,  16,
    211,  77, 117,  41,  20,  67, 123, 180, 111,  91, 174, 224,   7,  46,  52, 127,
    120, 108, 182, 244, 222, 207, 150,  60, 130, 148,  42, 139, 194,  93,  21, 216,
    209, 161,  48, 245,   4,  37,  19,  43, 114,  90,  69, 213, 186,  71, 163, 200,
)

# Additional walk-constructed sample S-box.
SBOX_SAMPLE = (
    147,  81,  50,  43,  92, 245, 182,  30, 237,  34,  42,  39,  53, 246, 219, 188,
      1, 221, 161,  76, 158, 213, 160, 197, 185, 164, 184, 251, 223,  99,  47,  27,
    172, 107, 146,  83, 176, 180, 171, 183, 109,  56, 225,  80,  64, 155, 173,  63,
     15, 105, 235, 163, 230, 234, 193,  82,  89, 177, 117, 152, 216, 110, 137,  91,
    162, 133, 174, 122, 102, 129, 108, 169,  72, 116, 113, 254,  22, 121,  68, 204,
    249, 187,  12, 115,  69,  54,  95,   5, 126,  94,  17,  24,  77, 250,  86, 154,
    222,  98,  11, 165, 101,  33,  87,  85, 226,  25, 179, 168, 201, 224, 239,  70,
     31, 138, 149,  96, 208, 181, 106, 209, 100, 215,  88,   8, 139, 210,  29, 104,
     40,  62,  36,  52,  44,  49, 220,  21, 227, 218,  74, 231,  18, 112, 212, 150,
    206, 192, 189, 211, 153, 127,  10, 194, 229,   6, 103,  45, 134, 241, 240, 217,
    214, 178,  75, 142, 120,  16, 252, 144, 228,  55, 136, 242, 118,   2, 195,  71,
    202, 186,  13,  28, 243, 166, 148,  84, 111, 141,  67, 170, 167, 132,  51, 123,
     93,  37,  38, 248, 145,  79, 135, 175,  32,  78, 156, 238, 203, 236,  61, 232,
     23, 130, 143,   3,  90,  35, 233,  46, 196, 151,  48, 159,  19,  20, 119,  65,
     73,  14, 131, 200,  97, 190, 128, 157, 244, 205,  26, 207, 125, 199,  41, 140,
     58,  57,   4,  66, 253,  59, 247,  60, 114,   9, 198, 255, 124, 191,   7,   0,
)

PUBLISHED = {"1a": SBOX_1A, "1b": SBOX_1B, "1c": SBOX_1C, "sample": SBOX_SAMPLE}
