#!/usr/bin/env python3
# SPDX-License-Identifier: MIT
"""Regenerate data/bank/default.tsv from the source formula tables below.

Each Feynman and Nguyen formula is rewritten into a function of time alone:
the listed time-dependent variables become ``t``, every other variable becomes
a constant (10 unless overridden), ``pi`` becomes its numeric value and ``ln``
becomes ``log``.  Constants are not folded, so the stored expression keeps the
structure of the source formula.  Formulas that need operators outside the
search grammar (arcsin, arccos, tanh) are not converted.

Usage: build_default_bank.py [output path]
"""

import ast
import math
import sys
from pathlib import Path

VERSION = "2026.10-1"
DEFAULT_VALUE = 10

# (id, formula, time variables, overrides, original quantity)
#
# Of the 120 source formulas, I.26.2 and I.30.5 (arcsin), II.35.21 (tanh) and
# bonus.10 (arccos) are not converted.  I.12.5, I.29.4, I.43.31, II.13.23,
# II.13.34, II.15.5, II.34.2 and II.38.3 become the same tree shape as an
# earlier entry once substituted, and I.11.19 and II.2.42 reduce to linear
# functions of t that the bank already holds; those ten are left out.
FEYNMAN = [
    ("I.6.2a", "exp(-theta**2/2)/sqrt(2*pi)", ["theta"], {}, "Gaussian density"),
    ("I.6.2", "exp(-(theta/sigma)**2/2)/(sqrt(2*pi)*sigma)", ["theta"], {}, "Gaussian density with width"),
    ("I.6.2b", "exp(-((theta-theta1)/sigma)**2/2)/(sqrt(2*pi)*sigma)", ["theta"], {"theta1": 5}, "shifted Gaussian density"),
    ("I.8.14", "sqrt((x2-x1)**2+(y2-y1)**2)", ["x2"], {"x1": 5, "y1": 2, "y2": 6}, "distance between points"),
    ("I.9.18", "G*m1*m2/((x2-x1)**2+(y2-y1)**2+(z2-z1)**2)", ["x2"], {"x1": 5, "y1": 2, "y2": 6, "z1": 1, "z2": 3}, "Newtonian gravitation"),
    ("I.10.7", "m_0/sqrt(1-v**2/c**2)", ["v"], {"c": 20}, "relativistic mass"),
    ("I.12.1", "mu*Nn", ["Nn"], {"mu": 0.5}, "friction force"),
    ("I.12.2", "q1*q2*r/(4*pi*epsilon*r**3)", ["r"], {}, "Coulomb force"),
    ("I.12.4", "q1*r/(4*pi*epsilon*r**3)", ["r"], {}, "point-charge field"),
    ("I.12.11", "q*(Ef+B*v*sin(theta))", ["theta"], {}, "Lorentz force"),
    ("I.13.4", "1/2*m*(v**2+u**2+w**2)", ["v"], {}, "kinetic energy"),
    ("I.13.12", "G*m1*m2*(1/r2-1/r1)", ["r2"], {}, "gravitational potential energy"),
    ("I.14.3", "m*g*z", ["z"], {"g": 9.8}, "gravitational potential energy near ground"),
    ("I.14.4", "1/2*k_spring*x**2", ["x"], {}, "spring potential energy"),
    ("I.15.3x", "(x-u*t)/sqrt(1-u**2/c**2)", ["t"], {"u": 5, "c": 20}, "Lorentz transformation of position"),
    ("I.15.3t", "(t-u*x/c**2)/sqrt(1-u**2/c**2)", ["t"], {"u": 5, "c": 20}, "Lorentz transformation of time"),
    ("I.15.10", "m_0*v/sqrt(1-v**2/c**2)", ["v"], {"c": 20}, "relativistic momentum"),
    ("I.16.6", "(u+v)/(1+u*v/c**2)", ["v"], {"c": 20}, "relativistic velocity addition"),
    ("I.18.4", "(m1*r1+m2*r2)/(m1+m2)", ["r1"], {"m2": 5}, "centre of mass"),
    ("I.18.12", "r*F*sin(theta)", ["theta"], {}, "torque"),
    ("I.18.14", "m*r*v*sin(theta)", ["theta"], {}, "angular momentum"),
    ("I.24.6", "1/2*m*(omega**2+omega_0**2)*1/2*x**2", ["x"], {}, "oscillator energy"),
    ("I.25.13", "q/C", ["q"], {}, "capacitor voltage"),
    ("I.27.6", "1/(1/d1+n/d2)", ["d1"], {"n": 1.5}, "thin lens focal length"),
    ("I.29.16", "sqrt(x1**2+x2**2-2*x1*x2*cos(theta1-theta2))", ["theta1"], {"x2": 5, "theta2": 1}, "law of cosines"),
    ("I.30.3", "Int_0*sin(n*theta/2)**2/sin(theta/2)**2", ["theta"], {"n": 3}, "multi-slit interference"),
    ("I.32.5", "q**2*a**2/(6*pi*epsilon*c**3)", ["a"], {}, "Larmor radiated power"),
    ("I.32.17", "(1/2*epsilon*c*Ef**2)*(8*pi*r**2/3)*(omega**4/(omega**2-omega_0**2)**2)", ["omega"], {"omega_0": 5}, "scattered power of a driven dipole"),
    ("I.34.8", "q*v*B/p", ["v"], {}, "cyclotron frequency"),
    ("I.34.1", "omega_0/(1-v/c)", ["v"], {"c": 20}, "Doppler shift, moving source"),
    ("I.34.14", "(1+v/c)/sqrt(1-v**2/c**2)*omega_0", ["v"], {"c": 20}, "relativistic Doppler shift"),
    ("I.34.27", "(h/(2*pi))*omega", ["omega"], {}, "photon energy"),
    ("I.37.4", "I1+I2+2*sqrt(I1*I2)*cos(delta)", ["delta"], {"I2": 5}, "two-beam interference"),
    ("I.38.12", "4*pi*epsilon*(h/(2*pi))**2/(m*q**2)", ["m"], {}, "Bohr radius"),
    ("I.39.1", "3/2*pr*V", ["V"], {}, "ideal gas internal energy"),
    ("I.39.11", "1/(gamma-1)*pr*V", ["V"], {"gamma": 1.4}, "gas energy with heat capacity ratio"),
    ("I.39.22", "n*kb*T/V", ["V"], {}, "ideal gas pressure"),
    ("I.40.1", "n_0*exp(-m*g*x/(kb*T))", ["x"], {"m": 1, "g": 9.8}, "barometric density"),
    ("I.41.16", "h/(2*pi)*omega**3/(pi**2*c**2*(exp((h/(2*pi))*omega/(kb*T))-1))", ["omega"], {}, "Planck radiation law"),
    ("I.43.16", "mu_drift*q*Ve/d", ["Ve"], {}, "drift velocity"),
    ("I.43.43", "1/(gamma-1)*kb*v/A", ["v"], {"gamma": 1.4}, "thermal conductivity of a gas"),
    ("I.44.4", "n*kb*T*ln(V2/V1)", ["V2"], {}, "isothermal work"),
    ("I.47.23", "sqrt(gamma*pr/rho)", ["pr"], {"gamma": 1.4}, "speed of sound"),
    ("I.48.2", "m*c**2/sqrt(1-v**2/c**2)", ["v"], {"c": 20}, "relativistic energy"),
    ("I.50.26", "x1*(cos(omega*t)+alpha*cos(omega*t)**2)", ["t"], {"omega": 2, "alpha": 0.5}, "anharmonic oscillator response"),
    ("II.3.24", "Pwr/(4*pi*r**2)", ["r"], {}, "radiant flux density"),
    ("II.4.23", "q/(4*pi*epsilon*r)", ["r"], {}, "electrostatic potential"),
    ("II.6.11", "1/(4*pi*epsilon)*p_d*cos(theta)/r**2", ["theta"], {}, "dipole potential"),
    ("II.6.15a", "p_d/(4*pi*epsilon)*3*z/r**5*sqrt(x**2+y**2)", ["z"], {}, "dipole field magnitude"),
    ("II.6.15b", "p_d/(4*pi*epsilon)*3*cos(theta)*sin(theta)/r**3", ["theta"], {}, "dipole field, angular form"),
    ("II.8.7", "3/5*q**2/(4*pi*epsilon*d)", ["d"], {}, "energy of a charged sphere"),
    ("II.8.31", "epsilon*Ef**2/2", ["Ef"], {}, "electric field energy density"),
    ("II.10.9", "sigma_den/epsilon*1/(1+chi)", ["chi"], {}, "field in a dielectric"),
    ("II.11.3", "q*Ef/(m*(omega_0**2-omega**2))", ["omega"], {"omega_0": 5}, "driven electron displacement"),
    ("II.11.17", "n_0*(1+p_d*Ef*cos(theta)/(kb*T))", ["theta"], {}, "polar molecule density"),
    ("II.11.20", "n_rho*p_d**2*Ef/(3*kb*T)", ["T"], {}, "orientational polarization"),
    ("II.11.27", "n*alpha/(1-(n*alpha/3))*epsilon*Ef", ["alpha"], {"n": 0.1}, "Clausius-Mossotti polarization"),
    ("II.11.28", "1+n*alpha/(1-(n*alpha/3))", ["alpha"], {"n": 0.1}, "Clausius-Mossotti dielectric constant"),
    ("II.13.17", "1/(4*pi*epsilon*c**2)*2*I/r", ["r"], {}, "field of a straight current"),
    ("II.15.4", "-mom*B*cos(theta)", ["theta"], {}, "magnetic dipole energy"),
    ("II.21.32", "q/(4*pi*epsilon*r*(1-v/c))", ["v"], {"c": 20}, "Lienard-Wiechert potential"),
    ("II.24.17", "sqrt(omega**2/c**2-pi**2/d**2)", ["omega"], {}, "waveguide wave number"),
    ("II.27.16", "epsilon*c*Ef**2", ["Ef"], {}, "electromagnetic energy flux"),
    ("II.34.2a", "q*v/(2*pi*r)", ["v"], {}, "orbiting charge current"),
    ("II.34.11", "g_*q*B/(2*m)", ["B"], {"g_": 2}, "Larmor frequency"),
    ("II.34.29b", "g_*mom*B*Jz/(h/(2*pi))", ["Jz"], {"g_": 2}, "Zeeman energy"),
    ("II.35.18", "n_0/(exp(mom*B/(kb*T))+exp(-mom*B/(kb*T)))", ["B"], {}, "two-state population"),
    ("II.36.38", "mom*H/(kb*T)+(mom*alpha)/(epsilon*c**2*kb*T)*M", ["H"], {}, "mean-field magnetization"),
    ("II.37.1", "mom*(1+chi)*B", ["B"], {}, "paramagnetic energy"),
    ("II.38.14", "Y/(2*(1+sigma))", ["sigma"], {}, "shear modulus"),
    ("III.4.32", "1/(exp((h/(2*pi))*omega/(kb*T))-1)", ["omega"], {}, "Bose-Einstein occupation"),
    ("III.4.33", "(h/(2*pi))*omega/(exp((h/(2*pi))*omega/(kb*T))-1)", ["omega"], {}, "mean oscillator energy"),
    ("III.7.38", "2*mom*B/(h/(2*pi))", ["B"], {}, "spin precession frequency"),
    ("III.8.54", "sin(E_n*t/(h/(2*pi)))**2", ["t"], {"E_n": 1, "h": 6.283185307179586}, "two-state transition probability"),
    ("III.9.52", "(p_d*Ef*t/(h/(2*pi)))*sin((omega-omega_0)*t/2)**2/((omega-omega_0)*t/2)**2", ["t"], {"omega_0": 8}, "driven transition probability"),
    ("III.10.19", "mom*sqrt(Bx**2+By**2+Bz**2)", ["Bx"], {}, "magnetic moment energy"),
    ("III.12.43", "n*(h/(2*pi))", ["n"], {}, "angular momentum quantum"),
    ("III.13.18", "2*E_n*d**2*k/(h/(2*pi))", ["k"], {}, "lattice group velocity"),
    ("III.14.14", "I_0*(exp(q*Volt/(kb*T))-1)", ["Volt"], {}, "diode current"),
    ("III.15.12", "2*U*(1-cos(k*d))", ["k"], {"d": 1}, "tight-binding band energy"),
    ("III.15.14", "(h/(2*pi))**2/(2*E_n*d**2)", ["d"], {}, "effective mass"),
    ("III.15.27", "2*pi*alpha/(n*d)", ["n"], {}, "lattice wave number"),
    ("III.17.37", "beta*(1+alpha*cos(theta))", ["theta"], {"alpha": 0.5}, "angular distribution"),
    ("III.19.51", "-m*q**4/(2*(4*pi*epsilon)**2*(h/(2*pi))**2)*(1/n**2)", ["n"], {}, "hydrogen energy levels"),
    ("III.21.20", "-rho_c_0*q*A_vec/m", ["A_vec"], {}, "probability current"),
    ("bonus.1", "(Z_1*Z_2*alpha*hbar*c/(4*E_n*sin(theta/2)**2))**2", ["theta"], {}, "Rutherford scattering"),
    ("bonus.2", "m*k_G/L**2*(1+sqrt(1+2*E_n*L**2/(m*k_G**2))*cos(theta1-theta2))", ["theta1"], {"theta2": 1}, "Kepler orbit polar form"),
    ("bonus.3", "d*(1-alpha**2)/(1+alpha*cos(theta1-theta2))", ["theta1"], {"alpha": 0.5, "theta2": 1}, "ellipse polar equation"),
    ("bonus.5", "2*pi*d**(3/2)/sqrt(G*(m1+m2))", ["d"], {}, "Kepler's third law"),
    ("bonus.7", "sqrt(8*pi*G*rho/3)", ["rho"], {}, "Hubble rate of a flat universe"),
    ("bonus.8", "E_n/(1+E_n/(m*c**2)*(1-cos(theta)))", ["theta"], {"c": 1}, "Compton scattering"),
    ("bonus.11", "I_0*(sin(alpha/2)*sin(n*delta/2)/(alpha/2*sin(delta/2)))**2", ["delta"], {"n": 3, "alpha": 1}, "grating intensity"),
    ("bonus.13", "1/(4*pi*epsilon)*q/sqrt(r**2+d**2-2*r*d*cos(alpha))", ["alpha"], {"d": 5}, "off-centre point-charge potential"),
    ("bonus.14", "Ef*cos(theta)*(-r+d**3/r**2*(alpha-1)/(alpha+2))", ["theta"], {"d": 5}, "field near a dielectric sphere"),
    ("bonus.15", "sqrt(1-v**2/c**2)*omega/(1+v/c*cos(theta))", ["theta"], {"v": 5, "c": 20}, "relativistic Doppler, oblique"),
    ("bonus.16", "sqrt((p-q*A_vec)**2*c**2+m**2*c**4)+q*Volt", ["p"], {}, "relativistic charged-particle energy"),
    ("bonus.17", "1/(2*m)*(p**2+m**2*omega**2*x**2*(1+alpha*x/y))", ["x"], {"alpha": 0.1}, "anharmonic oscillator energy"),
    ("bonus.20", "1/(4*pi)*alpha**2*h**2/(m**2*c**2)*(omega_0/omega)**2*(omega_0/omega+omega/omega_0-sin(beta)**2)", ["omega"], {"omega_0": 5}, "Klein-Nishina cross section"),
    ("II.27.18", "epsilon*Ef**2", ["Ef"], {}, "electric field energy density, full form"),
    ("II.34.29a", "q*h/(4*pi*m)", ["m"], {}, "Bohr magneton"),
    ("bonus.4", "sqrt(2/m*(E_n-U-L**2/(2*m*r**2)))", ["r"], {"U": 1, "E_n": 20}, "radial speed in a central potential"),
    ("bonus.6", "sqrt(1+2*epsilon**2*E_n*L**2/(m*(Z_1*Z_2*q**2)**2))", ["E_n"], {}, "Kepler orbit eccentricity"),
    ("bonus.9", "-32/5*G**4/c**5*(m1*m2)**2*(m1+m2)/r**5", ["r"], {}, "gravitational-wave power"),
    ("bonus.12", "q/(4*pi*epsilon*y**2)*(4*pi*epsilon*Volt*d-q*d*y**3/(y**2-d**2)**2)", ["y"], {"d": 5}, "charge near a grounded sphere"),
    ("bonus.18", "3/(8*pi*G)*(c**2*k_f/r**2+H_G**2*(1-2*alpha))", ["r"], {}, "critical density with curvature"),
    ("bonus.19", "-1/(8*pi*G)*(c**4*k_f/r**2+H_G**2*c**2*(1-2*alpha))", ["r"], {}, "cosmological pressure"),
]

NGUYEN = [
    ("1", "x**3+x**2+x", ["x"], {}, "Nguyen-1"),
    ("2", "x**4+x**3+x**2+x", ["x"], {}, "Nguyen-2"),
    ("3", "x**5+x**4+x**3+x**2+x", ["x"], {}, "Nguyen-3"),
    ("4", "x**6+x**5+x**4+x**3+x**2+x", ["x"], {}, "Nguyen-4"),
    ("5", "sin(x**2)*cos(x)-1", ["x"], {}, "Nguyen-5"),
    ("6", "sin(x)+sin(x+x**2)", ["x"], {}, "Nguyen-6"),
    ("7", "ln(x+1)+ln(x**2+1)", ["x"], {}, "Nguyen-7"),
    ("8", "sqrt(x)", ["x"], {}, "Nguyen-8"),
    ("9", "sin(x)+sin(y**2)", ["x", "y"], {}, "Nguyen-9, both inputs mapped to t"),
    ("10", "2*sin(x)*cos(y)", ["x", "y"], {}, "Nguyen-10, both inputs mapped to t"),
]

# Written directly in the bank grammar.
AUGMENTED = [
    ("sho_cos", "10 * cos(2 * t + 1) + 10", "undamped harmonic oscillator, cosine phase form"),
    ("sho_sin", "10 * sin(2 * t + 1) + 10", "undamped harmonic oscillator, sine phase form"),
    ("damped_cos", "10 * exp(-0.5 * t) * cos(2 * t + 1) + 10", "damped harmonic oscillator, cosine phase form"),
    ("damped_sin", "10 * exp(-0.5 * t) * sin(2 * t + 1) + 10", "damped harmonic oscillator, sine phase form"),
    ("linear", "10 + 2 * t", "uniform linear motion"),
    ("uniform_accel", "10 + 2 * t + 4.9 * t ^ 2", "uniformly accelerated motion"),
    ("projectile_y", "10 + 5 * t - 4.9 * t ^ 2", "projectile height"),
    ("exp_decay", "10 * exp(-0.5 * t) + 10", "exponential decay towards a rest value"),
    ("driven_envelope", "10 * (1 - exp(-0.5 * t)) * cos(2 * t) + 10", "damped-driven oscillator amplitude build-up"),
    ("circular_x", "10 * cos(2 * t) + 10", "uniform circular motion, x component"),
    ("circular_y", "10 * sin(2 * t) + 10", "uniform circular motion, y component"),
    ("pendulum_small_angle", "10 * sin(0.5 * cos(3 * t))", "pendulum bob x under the small-angle solution"),
    ("logistic", "10 / (1 + exp(-1 * t))", "logistic saturation"),
]

FUNCTIONS = {"sin", "cos", "tan", "exp", "log", "ln", "sqrt"}


class Substitute(ast.NodeTransformer):
    def __init__(self, time_vars, overrides):
        self.time_vars = set(time_vars)
        self.overrides = overrides
        self.used = {}

    def visit_Call(self, node):
        name = node.func.id
        if name not in FUNCTIONS:
            raise ValueError(f"unsupported function {name}")
        node.func = ast.Name(id="log" if name == "ln" else name, ctx=ast.Load())
        node.args = [self.visit(a) for a in node.args]
        return node

    def visit_Name(self, node):
        if node.id in self.time_vars:
            return ast.Name(id="t", ctx=ast.Load())
        if node.id == "pi":
            return ast.Constant(math.pi)
        value = self.overrides.get(node.id, DEFAULT_VALUE)
        self.used[node.id] = value
        return ast.Constant(value)


def convert(formula, time_vars, overrides):
    tree = ast.parse(formula, mode="eval")
    sub = Substitute(time_vars, overrides)
    tree = ast.fix_missing_locations(sub.visit(tree))
    text = ast.unparse(tree).replace("**", "^")
    return text, sub.used


def node_count(text):
    """Approximate node count matching the C++ parser's tree shape."""
    tree = ast.parse(text.replace("^", "**"), mode="eval").body

    def count(n):
        if isinstance(n, ast.BinOp):
            return 1 + count(n.left) + count(n.right)
        if isinstance(n, ast.UnaryOp):
            if isinstance(n.operand, ast.Constant):
                return 1
            return 1 + count(n.operand)
        if isinstance(n, ast.Call):
            return 1 + sum(count(a) for a in n.args)
        return 1

    return count(tree)


def main():
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parents[2] / "data/bank/default.tsv"
    rows = []
    for source, table in (("feynman", FEYNMAN), ("nguyen", NGUYEN)):
        for ident, formula, time_vars, overrides, note in table:
            text, used = convert(formula, time_vars, overrides)
            subs = ", ".join(f"{k}={v:g}" for k, v in sorted(used.items()))
            detail = f"{note}; source {formula}; t <- {', '.join(time_vars)}"
            if subs:
                detail += f"; {subs}"
            rows.append((f"{source}.{ident}", source, text, detail))
    for ident, text, note in AUGMENTED:
        rows.append((f"augmented.{ident}", "augmented", text, note))

    with out.open("w") as f:
        f.write(f"# VERSION {VERSION}\n")
        f.write("# Equation bank. Columns: id<TAB>source<TAB>expression<TAB>notes\n")
        f.write("# Generated by tools/bank/build_default_bank.py; edit the tables there, not this file.\n")
        for row in rows:
            f.write("\t".join(row) + "\n")

    for source in ("feynman", "nguyen", "augmented"):
        sizes = [node_count(r[2]) for r in rows if r[1] == source]
        print(f"{source}: {len(sizes)} entries, mean nodes {sum(sizes) / len(sizes):.2f}")


if __name__ == "__main__":
    main()
