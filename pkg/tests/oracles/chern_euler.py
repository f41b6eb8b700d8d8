"""Independent Euler-number oracle via Chern classes of complete intersections.

chi(X) for a smooth complete intersection of degrees d_i in P^n is the
coefficient of H^dim in (1+H)^(n+1) / prod(1 + d_i H), times prod d_i.
Run as a script to print the values shipped in the package data file.
"""
import sympy as sp

H = sp.symbols("H")


def chi_complete_intersection(n: int, degrees) -> int:
    dim = n - len(degrees)
    total = (1 + H) ** (n + 1)
    for d in degrees:
        total = total / (1 + d * H)
    top = sp.series(total, H, 0, dim + 1).removeO().coeff(H, dim)
    return int(top * sp.prod(degrees))


def quintic_degeneration() -> dict:
    """Quintic threefold degenerating to a hyperplane and a blown-up quartic."""
    quintic = chi_complete_intersection(4, [5])
    p3 = chi_complete_intersection(3, [])
    k3 = chi_complete_intersection(3, [4])
    quartic = chi_complete_intersection(4, [4])
    curve = chi_complete_intersection(4, [1, 4, 5])
    return {"X": quintic, "X1": p3, "X2": quartic + curve, "D0": k3,
            "quartic_threefold": quartic, "base_curve": curve}


if __name__ == "__main__":
    print(quintic_degeneration())
