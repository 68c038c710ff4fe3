#pragma once

#include "resonavis/assembly.hpp"
#include "resonavis/config.hpp"
#include "resonavis/error.hpp"
#include "resonavis/io.hpp"
#include "resonavis/linalg.hpp"
#include "resonavis/mesh.hpp"
#include "resonavis/oracle.hpp"
#include "resonavis/solver.hpp"
#include "resonavis/study.hpp"
