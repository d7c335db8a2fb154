#pragma once

// Umbrella header for the whole library.

#include "spinal/action.hpp"
#include "spinal/algebra.hpp"
#include "spinal/bloch.hpp"
#include "spinal/closed_form.hpp"
#include "spinal/eigenfunctions.hpp"
#include "spinal/graph.hpp"
#include "spinal/io.hpp"
#include "spinal/measures.hpp"
#include "spinal/oracle.hpp"
