#ifndef RCID_VERSION_HPP_
#define RCID_VERSION_HPP_

namespace rcid {

inline constexpr const char* kToolkitName = "rcid";
inline constexpr const char* kToolkitVersion = "0.1.0";

} // namespace rcid

#endif // RCID_VERSION_HPP_
