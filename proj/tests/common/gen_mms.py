"""Generates tests/common/mms_solution.hpp: a smooth axisymmetric manufactured
Navier-Stokes solution and the body force / outlet traction it requires.

    python3 tests/common/gen_mms.py > tests/common/mms_solution.hpp
"""
import sympy as sp

r, z = sp.symbols("r z", positive=True)
rho, mu = sp.symbols("rho mu", positive=True)

# Stream function psi = r^2 phi keeps u_r = O(r) and u_z even in r.
phi = sp.cos(r**2) * sp.exp(z) / 2
ur = -r * sp.diff(phi, z)
uz = 2 * phi + r * sp.diff(phi, r)
p = (1 + r**2) * sp.cos(sp.pi * z)

div = sp.simplify(sp.diff(r * ur, r) / r + sp.diff(uz, z))
assert div == 0, div


def lap(f):
    return sp.diff(r * sp.diff(f, r), r) / r + sp.diff(f, z, 2)


fr = rho * (ur * sp.diff(ur, r) + uz * sp.diff(ur, z)) - mu * (lap(ur) - ur / r**2) + sp.diff(p, r)
fz = rho * (ur * sp.diff(uz, r) + uz * sp.diff(uz, z)) - mu * lap(uz) + sp.diff(p, z)
# Traction mu du/dn - p n on a plane z = const with outward normal +z.
tr = mu * sp.diff(ur, z)
tz = mu * sp.diff(uz, z) - p

exprs = {
    "u_r": ur, "u_z": uz, "p": p,
    "f_r": fr, "f_z": fz, "t_r": tr, "t_z": tz,
}


def body(e):
    return sp.ccode(sp.simplify(sp.expand(e)))


print("// Generated by gen_mms.py; do not edit.")
print("#pragma once\n")
print("#include <cmath>\n")
print("namespace mms {\n")
for name, e in exprs.items():
    fname = name.replace("_", "")
    used = {str(sym) for sym in e.free_symbols}
    args = ", ".join(("" if a in used else "[[maybe_unused]] ") + "double " + a
                     for a in ("r", "z", "rho", "mu"))
    print(f"inline double {fname}({args}) {{")
    print(f"  return {body(e)};")
    print("}\n")
print("} // namespace mms")
