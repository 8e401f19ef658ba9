#pragma once

#include <stdexcept>
#include <string>

namespace bayesedge
{
    class Error : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    // Caller supplied a parameter outside its valid domain.
    class InvalidArgument : public Error
    {
    public:
        using Error::Error;
    };

    class QuadratureFailure : public Error
    {
    public:
        using Error::Error;
    };

    class DimensionMismatch : public Error
    {
    public:
        using Error::Error;
    };

    class DegenerateImage : public Error
    {
    public:
        using Error::Error;
    };

    class DegenerateField : public Error
    {
    public:
        using Error::Error;
    };

    class OutOfBounds : public Error
    {
    public:
        using Error::Error;
    };

    class InsufficientGrid : public Error
    {
    public:
        using Error::Error;
    };

    class EmptyTruth : public Error
    {
    public:
        using Error::Error;
    };

    class EmptyRegions : public Error
    {
    public:
        using Error::Error;
    };

    class IoError : public Error
    {
    public:
        using Error::Error;
    };
} // namespace bayesedge
