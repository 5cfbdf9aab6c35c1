#pragma once

#include "hmx/assembly.hpp"
#include "hmx/clustering.hpp"
#include "hmx/csv.hpp"
#include "hmx/factorization.hpp"
#include "hmx/geometry.hpp"
#include "hmx/h2.hpp"
#include "hmx/hmatrix.hpp"
#include "hmx/kernel.hpp"
#include "hmx/linalg.hpp"
#include "hmx/lowrank.hpp"
#include "hmx/mesh.hpp"
#include "hmx/quadrature.hpp"
