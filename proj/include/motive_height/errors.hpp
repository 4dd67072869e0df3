#ifndef MOTIVE_HEIGHT_ERRORS_HPP
#define MOTIVE_HEIGHT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace motive_height
{

/// Base class of every error raised by the library.
class error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// Certified arithmetic could not decide a zero test at the working precision.
class precision_exhausted : public error
{
public:
    explicit precision_exhausted(const std::string &what)
        : error("precision exhausted: " + what)
    {
    }
};

class not_sublattice : public error
{
public:
    using error::error;
};

// Filtration length exceeds p - 1, outside the Fontaine-Laffaille range.
class window_too_wide : public error
{
public:
    using error::error;
};

class missing_metric : public error
{
public:
    using error::error;
};

class zero_vector : public error
{
public:
    using error::error;
};

class weight_mismatch : public error
{
public:
    using error::error;
};

class window_mismatch : public error
{
public:
    using error::error;
};

class degenerate_periods : public error
{
public:
    using error::error;
};

class incompatible_spec : public error
{
public:
    using error::error;
};

class strong_divisibility_lost : public error
{
public:
    using error::error;
};

/// Input data violates a structural invariant (raised by operations whose
/// precondition is a passing validation).
class invalid_data : public error
{
public:
    using error::error;
};

/// Malformed document or command-line input.
class parse_error : public error
{
public:
    using error::error;
};

} // namespace motive_height

#endif
