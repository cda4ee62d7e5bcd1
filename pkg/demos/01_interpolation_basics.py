"""Tour of the Chebyshev machinery: nodes, transforms, derivatives, tensors.

Run:  python demos/01_interpolation_basics.py
"""

import numpy as np

import chebnash as cn
from chebnash.cheb1d import to_reference

print("=" * 64)
print("1-D interpolation on an interval")
print("=" * 64)

basis = cn.make_basis(10, 0.0, 2.0)
print(f"degree {basis.degree} basis on [{basis.a}, {basis.b}]")
print("first nodes (descending):", np.round(basis.nodes[:4], 6), "...")

coef = cn.coeffs_from_samples(np.sin(3.0 * basis.nodes), basis)
xs = np.linspace(0.0, 2.0, 7)
approx = cn.eval_1d(coef, to_reference(basis, xs))
print(f"{'x':>6} {'sin(3x)':>12} {'interpolant':>12} {'error':>10}")
for x, a in zip(xs, approx):
    print(f"{x:6.3f} {np.sin(3 * x):12.8f} {a:12.8f} {abs(a - np.sin(3 * x)):10.2e}")

print("\nconvergence of the max error with the degree:")
grid = np.linspace(0.0, 2.0, 1001)
for n in (4, 8, 12, 16, 20):
    b = cn.make_basis(n, 0.0, 2.0)
    c = cn.coeffs_from_samples(np.sin(3.0 * b.nodes), b)
    err = np.max(np.abs(cn.eval_1d(c, to_reference(b, grid)) - np.sin(3.0 * grid)))
    print(f"  degree {n:2d}: {err:9.2e}")

print("\nderivative in coefficient space (chain-rule factor 2/(b-a)):")
dcoef = cn.derivative_coeffs(coef)
scale = 2.0 / (basis.b - basis.a)
dx = scale * cn.eval_1d(dcoef, to_reference(basis, xs))
print("max |d/dx - 3 cos(3x)| on the sample points:",
      f"{np.max(np.abs(dx - 3.0 * np.cos(3.0 * xs))):.2e}")

print()
print("=" * 64)
print("tensor-product interpolation and batched evaluation")
print("=" * 64)

rng = np.random.default_rng(0)
bases = (cn.make_basis(6, -1.0, 1.0), cn.make_basis(5, -1.0, 1.0))
gx, gy = np.meshgrid(bases[0].nodes, bases[1].nodes, indexing="ij")
surface = np.exp(-(gx**2) - 0.5 * gy**2)
tensor = cn.tensor_coeffs(surface, bases)
pt = rng.uniform(-1, 1, 2)
print(f"surface exp(-x^2 - y^2/2) at {np.round(pt, 3)}:",
      f"interpolant {cn.eval_full(tensor, pt):.8f}",
      f"exact {np.exp(-pt[0]**2 - 0.5 * pt[1]**2):.8f}")

# a stack of 5 independent surfaces, each bound at its own x in one sweep
stack = cn.TensorStack(bases, rng.standard_normal((7, 6, 5)))
own_x = rng.uniform(-1, 1, 5)
gather = cn.make_gather_index((7, 6), 5)
bound = cn.eval_diagonal_batch(stack, own_x, gather)
print("\nbinding the first variable of each of 5 stacked surfaces at its own")
print("point in one batched contraction; residual versus a per-member loop:")
worst = 0.0
for j in range(5):
    member = cn.eval_axis(stack.member(j), [own_x[j]])[..., 0]
    worst = max(worst, np.max(np.abs(bound.coefficients[..., j] - member)))
print(f"  max residual: {worst:.2e}")

# the location-index route extracts the same diagonal from the cross product
picked = gather.take(cn.eval_axis(stack, own_x))
print("  gather-index route agrees to:",
      f"{np.max(np.abs(picked - bound.coefficients)):.2e}")
