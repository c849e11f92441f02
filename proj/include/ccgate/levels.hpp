#pragma once

namespace ccgate {

enum class Spin { up, down };  // m_s = +1/2, -1/2

/// Internal atomic levels. a = |F=1,mF=1>, b = |F=2,mF=2>; c is the auxiliary
/// level used on the first atom of the GHZ sweep.
enum class Level { a, b, c };

inline constexpr char level_name(Level l) { return l == Level::a ? 'a' : (l == Level::b ? 'b' : 'c'); }

}  // namespace ccgate
