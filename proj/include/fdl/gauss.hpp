#pragma once

namespace fdl::gauss {

// Gauss-Legendre rules mapped to [0,1]. Node counts differ on the two axes
// of a tensor product so no node pair can land on the u = w diagonal.
inline constexpr int kN4 = 4;
inline constexpr double kX4[kN4] = {
    0.069431844202973712388026755553595,
    0.330009478207571867598667120448378,
    0.669990521792428132401332879551622,
    0.930568155797026287611973244446405,
};
inline constexpr double kW4[kN4] = {
    0.173927422568726928686531974610999,
    0.326072577431273071313468025389001,
    0.326072577431273071313468025389001,
    0.173927422568726928686531974610999,
};

inline constexpr int kN5 = 5;
inline constexpr double kX5[kN5] = {
    0.046910077030668003601186560850304,
    0.230765344947158454481842789649895,
    0.5,
    0.769234655052841545518157210350105,
    0.953089922969331996398813439149696,
};
inline constexpr double kW5[kN5] = {
    0.118463442528094543757132020359959,
    0.239314335249683234020645757417819,
    0.284444444444444444444444444444444,
    0.239314335249683234020645757417819,
    0.118463442528094543757132020359959,
};

}  // namespace fdl::gauss
