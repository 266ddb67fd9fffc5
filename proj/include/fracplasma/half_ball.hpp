#pragma once

#include "fracplasma/extension.hpp"

namespace fracplasma {

// Weighted integrals over upper half balls B_r^+((x0, 0)) of an extension
// field, using its multilinear interpolant. The y^a factor is integrated
// exactly cell by cell; the other directions use Gauss rules, with the
// spherical boundary handled by clipping each cell.

/// Throws std::invalid_argument if B_r^+ leaves the computational box.
void require_half_ball_inside(const ExtensionField& w, const Point& center, double r);

/// int_{B_r^+} y^a |grad w|^2.
double half_ball_energy(const ExtensionField& w, const Point& center, double r);

/// int_{(dB_r)^+} y^a (w - shift)^2 dH^n.
double half_sphere_norm(const ExtensionField& w, const Point& center, double r, double shift = 0.0);

enum class ThinIntegrand { Square, PositiveSquare };

/// int_{B'_r} f(w(x, 0) - shift) with f = v^2 or v_+^2.
double thin_ball_integral(const ExtensionField& w, const Point& center, double r, double shift,
                          ThinIntegrand integrand);

}  // namespace fracplasma
