#ifndef TCDIFF_VERSION_HPP
#define TCDIFF_VERSION_HPP

namespace tcdiff {

inline constexpr const char* kVersion = "0.1.0";

}

#endif
