#include "avp/tables.hpp"

// Generated from core/data/*.tsv; tests/unit/test_tables.cpp keeps the two in sync.

namespace avp::tables {
const std::array<std::array<int, 20>, 20> kBlosum62 = {{
    {{4, 0, -2, -1, -2, 0, -2, -1, -1, -1, -1, -2, -1, -1, -1, 1, 0, 0, -3, -2}},  // A
    {{0, 9, -3, -4, -2, -3, -3, -1, -3, -1, -1, -3, -3, -3, -3, -1, -1, -1, -2, -2}},  // C
    {{-2, -3, 6, 2, -3, -1, -1, -3, -1, -4, -3, 1, -1, 0, -2, 0, -1, -3, -4, -3}},  // D
    {{-1, -4, 2, 5, -3, -2, 0, -3, 1, -3, -2, 0, -1, 2, 0, 0, -1, -2, -3, -2}},  // E
    {{-2, -2, -3, -3, 6, -3, -1, 0, -3, 0, 0, -3, -4, -3, -3, -2, -2, -1, 1, 3}},  // F
    {{0, -3, -1, -2, -3, 6, -2, -4, -2, -4, -3, 0, -2, -2, -2, 0, -2, -3, -2, -3}},  // G
    {{-2, -3, -1, 0, -1, -2, 8, -3, -1, -3, -2, 1, -2, 0, 0, -1, -2, -3, -2, 2}},  // H
    {{-1, -1, -3, -3, 0, -4, -3, 4, -3, 2, 1, -3, -3, -3, -3, -2, -1, 3, -3, -1}},  // I
    {{-1, -3, -1, 1, -3, -2, -1, -3, 5, -2, -1, 0, -1, 1, 2, 0, -1, -2, -3, -2}},  // K
    {{-1, -1, -4, -3, 0, -4, -3, 2, -2, 4, 2, -3, -3, -2, -2, -2, -1, 1, -2, -1}},  // L
    {{-1, -1, -3, -2, 0, -3, -2, 1, -1, 2, 5, -2, -2, 0, -1, -1, -1, 1, -1, -1}},  // M
    {{-2, -3, 1, 0, -3, 0, 1, -3, 0, -3, -2, 6, -2, 0, 0, 1, 0, -3, -4, -2}},  // N
    {{-1, -3, -1, -1, -4, -2, -2, -3, -1, -3, -2, -2, 7, -1, -2, -1, -1, -2, -4, -3}},  // P
    {{-1, -3, 0, 2, -3, -2, 0, -3, 1, -2, 0, 0, -1, 5, 1, 0, -1, -2, -2, -1}},  // Q
    {{-1, -3, -2, 0, -3, -2, 0, -3, 2, -2, -1, 0, -2, 1, 5, -1, -1, -3, -3, -2}},  // R
    {{1, -1, 0, 0, -2, 0, -1, -2, 0, -2, -1, 1, -1, 0, -1, 4, 1, -2, -3, -2}},  // S
    {{0, -1, -1, -1, -2, -2, -2, -1, -1, -1, -1, 0, -1, -1, -1, 1, 5, 0, -2, -2}},  // T
    {{0, -1, -3, -2, -1, -3, -3, 3, -2, 1, 1, -3, -2, -2, -3, -2, 0, 4, -3, -1}},  // V
    {{-3, -2, -4, -3, 1, -2, -2, -3, -3, -2, -1, -4, -4, -2, -3, -3, -2, -3, 11, 2}},  // W
    {{-2, -2, -3, -2, 3, -3, 2, -1, -2, -1, -1, -2, -3, -1, -2, -2, -2, -1, 2, 7}},  // Y
}};

const std::array<std::array<double, 20>, 20> kSchneiderWrede = {{
    {{0, 0.112, 0.819, 0.827, 0.54, 0.208, 0.696, 0.407, 0.891, 0.406, 0.379, 0.318, 0.191, 0.372, 1, 0.094, 0.22, 0.273, 0.739, 0.552}},  // A
    {{0.114, 0, 0.847, 0.838, 0.437, 0.32, 0.66, 0.304, 0.887, 0.301, 0.277, 0.324, 0.157, 0.341, 1, 0.176, 0.233, 0.167, 0.639, 0.457}},  // C
    {{0.729, 0.742, 0, 0.124, 0.924, 0.697, 0.435, 0.847, 0.249, 0.841, 0.819, 0.56, 0.657, 0.584, 0.295, 0.667, 0.649, 0.797, 1, 0.836}},  // D
    {{0.79, 0.788, 0.133, 0, 0.932, 0.779, 0.406, 0.86, 0.143, 0.854, 0.83, 0.599, 0.688, 0.598, 0.234, 0.726, 0.682, 0.824, 1, 0.837}},  // E
    {{0.508, 0.405, 0.977, 0.918, 0, 0.69, 0.663, 0.128, 0.903, 0.131, 0.169, 0.541, 0.42, 0.459, 1, 0.548, 0.499, 0.252, 0.207, 0.179}},  // F
    {{0.206, 0.312, 0.776, 0.807, 0.727, 0, 0.769, 0.592, 0.894, 0.591, 0.557, 0.381, 0.323, 0.467, 1, 0.158, 0.272, 0.464, 0.923, 0.728}},  // G
    {{0.896, 0.836, 0.629, 0.547, 0.907, 1, 0, 0.848, 0.566, 0.842, 0.825, 0.754, 0.777, 0.716, 0.697, 0.865, 0.834, 0.831, 0.981, 0.821}},  // H
    {{0.403, 0.296, 0.942, 0.891, 0.134, 0.592, 0.652, 0, 0.892, 0.013, 0.057, 0.457, 0.311, 0.383, 1, 0.443, 0.396, 0.133, 0.339, 0.213}},  // I
    {{0.889, 0.871, 0.279, 0.149, 0.957, 0.9, 0.438, 0.899, 0, 0.892, 0.871, 0.667, 0.757, 0.639, 0.154, 0.825, 0.759, 0.882, 1, 0.848}},  // K
    {{0.405, 0.296, 0.944, 0.892, 0.139, 0.596, 0.653, 0.013, 0.893, 0, 0.062, 0.452, 0.309, 0.376, 1, 0.443, 0.397, 0.133, 0.341, 0.205}},  // L
    {{0.383, 0.276, 0.932, 0.879, 0.182, 0.569, 0.648, 0.058, 0.884, 0.062, 0, 0.447, 0.285, 0.372, 1, 0.417, 0.358, 0.12, 0.391, 0.255}},  // M
    {{0.424, 0.425, 0.838, 0.835, 0.766, 0.512, 0.78, 0.615, 0.891, 0.603, 0.588, 0, 0.266, 0.175, 1, 0.361, 0.368, 0.503, 0.945, 0.641}},  // N
    {{0.22, 0.179, 0.852, 0.831, 0.515, 0.376, 0.696, 0.363, 0.875, 0.357, 0.326, 0.231, 0, 0.228, 1, 0.196, 0.161, 0.244, 0.72, 0.481}},  // P
    {{0.512, 0.462, 0.903, 0.861, 0.671, 0.648, 0.765, 0.532, 0.881, 0.518, 0.505, 0.181, 0.272, 0, 1, 0.461, 0.389, 0.464, 0.831, 0.522}},  // Q
    {{0.919, 0.905, 0.305, 0.225, 0.977, 0.928, 0.498, 0.929, 0.141, 0.92, 0.908, 0.69, 0.796, 0.668, 0, 0.86, 0.808, 0.914, 1, 0.859}},  // R
    {{0.1, 0.185, 0.801, 0.812, 0.622, 0.17, 0.718, 0.478, 0.883, 0.474, 0.44, 0.289, 0.181, 0.358, 1, 0, 0.174, 0.342, 0.827, 0.615}},  // S
    {{0.251, 0.261, 0.83, 0.812, 0.604, 0.312, 0.737, 0.455, 0.866, 0.453, 0.403, 0.315, 0.159, 0.322, 1, 0.185, 0, 0.345, 0.816, 0.596}},  // T
    {{0.275, 0.165, 0.9, 0.867, 0.269, 0.471, 0.649, 0.135, 0.889, 0.134, 0.12, 0.38, 0.212, 0.339, 1, 0.322, 0.305, 0, 0.472, 0.31}},  // V
    {{0.658, 0.56, 1, 0.931, 0.196, 0.829, 0.678, 0.305, 0.892, 0.304, 0.344, 0.631, 0.555, 0.538, 0.968, 0.689, 0.638, 0.418, 0, 0.204}},  // W
    {{0.587, 0.478, 1, 0.932, 0.202, 0.782, 0.678, 0.23, 0.904, 0.219, 0.268, 0.512, 0.444, 0.404, 0.995, 0.612, 0.557, 0.328, 0.244, 0}},  // Y
}};

const std::array<std::array<double, 20>, 20> kGrantham = {{
    {{0, 195, 126, 107, 113, 60, 86, 94, 106, 96, 84, 111, 27, 91, 112, 99, 58, 64, 148, 112}},  // A
    {{195, 0, 154, 170, 205, 159, 174, 198, 202, 198, 196, 139, 169, 154, 180, 112, 149, 192, 215, 194}},  // C
    {{126, 154, 0, 45, 177, 94, 81, 168, 101, 172, 160, 23, 108, 61, 96, 65, 85, 152, 181, 160}},  // D
    {{107, 170, 45, 0, 140, 98, 40, 134, 56, 138, 126, 42, 93, 29, 54, 80, 65, 121, 152, 122}},  // E
    {{113, 205, 177, 140, 0, 153, 100, 21, 102, 22, 28, 158, 114, 116, 97, 155, 103, 50, 40, 22}},  // F
    {{60, 159, 94, 98, 153, 0, 98, 135, 127, 138, 127, 80, 42, 87, 125, 56, 59, 109, 184, 147}},  // G
    {{86, 174, 81, 40, 100, 98, 0, 94, 32, 99, 87, 68, 77, 24, 29, 89, 47, 84, 115, 83}},  // H
    {{94, 198, 168, 134, 21, 135, 94, 0, 102, 5, 10, 149, 95, 109, 97, 142, 89, 29, 61, 33}},  // I
    {{106, 202, 101, 56, 102, 127, 32, 102, 0, 107, 95, 94, 103, 53, 26, 121, 78, 97, 110, 85}},  // K
    {{96, 198, 172, 138, 22, 138, 99, 5, 107, 0, 15, 153, 98, 113, 102, 145, 92, 32, 61, 36}},  // L
    {{84, 196, 160, 126, 28, 127, 87, 10, 95, 15, 0, 142, 87, 101, 91, 135, 81, 21, 67, 36}},  // M
    {{111, 139, 23, 42, 158, 80, 68, 149, 94, 153, 142, 0, 91, 46, 86, 46, 65, 133, 174, 143}},  // N
    {{27, 169, 108, 93, 114, 42, 77, 95, 103, 98, 87, 91, 0, 76, 103, 74, 38, 68, 147, 110}},  // P
    {{91, 154, 61, 29, 116, 87, 24, 109, 53, 113, 101, 46, 76, 0, 43, 68, 42, 96, 130, 99}},  // Q
    {{112, 180, 96, 54, 97, 125, 29, 97, 26, 102, 91, 86, 103, 43, 0, 110, 71, 96, 101, 77}},  // R
    {{99, 112, 65, 80, 155, 56, 89, 142, 121, 145, 135, 46, 74, 68, 110, 0, 58, 124, 177, 144}},  // S
    {{58, 149, 85, 65, 103, 59, 47, 89, 78, 92, 81, 65, 38, 42, 71, 58, 0, 69, 128, 92}},  // T
    {{64, 192, 152, 121, 50, 109, 84, 29, 97, 32, 21, 133, 68, 96, 96, 124, 69, 0, 88, 55}},  // V
    {{148, 215, 181, 152, 40, 184, 115, 61, 110, 61, 67, 174, 147, 130, 101, 177, 128, 88, 0, 37}},  // W
    {{112, 194, 160, 122, 22, 147, 83, 33, 85, 36, 36, 143, 110, 99, 77, 144, 92, 55, 37, 0}},  // Y
}};

const std::array<std::array<double, 5>, 20> kZScale = {{
    {{0.24, -2.32, 0.60, -0.14, 1.30}},  // A
    {{0.84, -1.67, 3.71, 0.18, -2.65}},  // C
    {{3.98, 0.93, 1.93, -2.46, 0.75}},  // D
    {{3.11, 0.26, -0.11, -0.34, -0.25}},  // E
    {{-4.22, 1.94, 1.06, 0.54, -0.62}},  // F
    {{2.05, -4.06, 0.36, -0.82, -0.38}},  // G
    {{2.47, 1.95, 0.26, 3.90, 0.09}},  // H
    {{-3.89, -1.73, -1.71, -0.84, 0.26}},  // I
    {{2.29, 0.89, -2.49, 1.49, 0.31}},  // K
    {{-4.28, -1.30, -1.49, -0.72, 0.84}},  // L
    {{-2.85, -0.22, 0.47, 1.94, -0.98}},  // M
    {{3.05, 1.62, 1.04, -1.15, 1.61}},  // N
    {{-1.66, 0.27, 1.84, 0.70, 2.00}},  // P
    {{1.75, 0.50, -1.44, -1.34, 0.66}},  // Q
    {{3.52, 2.50, -3.50, 1.99, -0.17}},  // R
    {{2.39, -1.07, 1.15, -1.39, 0.67}},  // S
    {{0.75, -2.18, -1.12, -1.46, -0.40}},  // T
    {{-2.59, -2.64, -1.54, -0.85, -0.02}},  // V
    {{-4.36, 3.94, 0.59, 3.44, -1.59}},  // W
    {{-2.54, 2.44, 0.43, 0.04, -1.47}},  // Y
}};

const std::array<std::array<double, 3>, 20> kPaacProperties = {{
    {{0.62, -0.5, 15}},  // A
    {{0.29, -1, 47}},  // C
    {{-0.9, 3, 59}},  // D
    {{-0.74, 3, 73}},  // E
    {{1.19, -2.5, 91}},  // F
    {{0.48, 0, 1}},  // G
    {{-0.4, -0.5, 82}},  // H
    {{1.38, -1.8, 57}},  // I
    {{-1.5, 3, 73}},  // K
    {{1.06, -1.8, 57}},  // L
    {{0.64, -1.3, 75}},  // M
    {{-0.78, 0.2, 58}},  // N
    {{0.12, 0, 42}},  // P
    {{-0.85, 0.2, 72}},  // Q
    {{-2.53, 3, 101}},  // R
    {{-0.18, 0.3, 31}},  // S
    {{-0.05, -0.4, 45}},  // T
    {{1.08, -1.5, 43}},  // V
    {{0.81, -3.4, 130}},  // W
    {{0.26, -2.3, 107}},  // Y
}};

const std::array<int, 20> kCodonCounts = {4, 2, 2, 2, 2, 4, 2, 3, 2, 6, 1, 2, 4, 2, 6, 6, 4, 4, 1, 2};

}  // namespace avp::tables
