#pragma once
// Everything below the command line.

#include "acbc/dynamics.hpp"
#include "acbc/spectral.hpp"
