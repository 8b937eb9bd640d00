import itertools
from fractions import Fraction

import pytest

from arrstab.arrangement import family_mkr
from arrstab.characters import (
    CharacterPolynomial,
    ClassFunction,
    FitInconsistentError,
    FitUnderdeterminedError,
    binomial_basis_form,
    character_of_cohomology,
    dual_char,
    evaluate,
    fit_character_polynomial,
    induction_character,
    inner_product,
    invariants_dim,
    irreducible_multiplicities,
    stability_report,
    sym_character,
    tensor_char,
    trivial_character,
    twisted_betti,
    verify_free_decomposition,
)
from arrstab.fim import ConjClass, MultiIndex, conj_classes, group_order, partitions

mi = MultiIndex


def X(k, j=1, m=1):
    return CharacterPolynomial.variable(k, j, m)


def test_evaluate_counts_cycles():
    assert evaluate(X(2), ConjClass(((2, 2, 1),))) == 2


def test_evaluate_product_across_factors():
    p = X(1, 1, 2) * X(1, 2, 2)
    assert evaluate(p, ConjClass(((1, 1), (1,)))) == 2


def test_evaluate_binomial_combination():
    p = X(1) * (X(1) - 1) / 2 + X(2)
    assert evaluate(p, ConjClass(((2, 1),))) == 1
    assert evaluate(p, ConjClass(((1, 1, 1),))) == 3
    assert evaluate(p, ConjClass(((3,),))) == 0


def test_polynomial_render_and_parse_roundtrip():
    p = X(1, 1, 2) * X(1, 2, 2) - 2 * X(2, 1, 2) * X(2, 2, 2)
    assert p.render() == "X1^(1)*X1^(2) - 2*X2^(1)*X2^(2)"
    assert CharacterPolynomial.parse(p.render(), m=2) == p
    q = X(1) * (X(1) - 1) / 2 + X(2)
    assert CharacterPolynomial.parse(q.render(), m=1) == q
    assert CharacterPolynomial.parse("0", m=1) == CharacterPolynomial.from_dict(1, {})


def test_multidegree():
    p = X(1, 1, 2) * X(1, 2, 2)
    assert p.multidegree() == mi((1, 1))
    q = X(1) * (X(1) - 1) / 2 + X(2)
    assert q.multidegree() == mi((2,))


def test_binomial_basis_form():
    q = X(1) * (X(1) - 1) / 2 + X(2)
    assert binomial_basis_form(q) == "binom(X1^(1),2) + X2^(1)"


def test_character_of_cohomology_braid3(braid, get_lattice):
    chi = character_of_cohomology(braid, mi((3,)), 1, get_lattice)
    assert dict(chi.values) == {
        ConjClass(((1, 1, 1),)): 3,
        ConjClass(((2, 1),)): 1,
        ConjClass(((3,),)): 0,
    }


def test_character_of_cohomology_degree_zero(braid):
    chi = character_of_cohomology(braid, mi((3,)), 0)
    assert all(v == 1 for v in chi.values.values())


def test_character_of_cohomology_two_factor(get_lattice):
    spec = family_mkr(2, 1, 1)
    chi = character_of_cohomology(spec, mi((2, 1)), 1, get_lattice)
    assert chi.identity_value == 2


def test_fit_pconf_h1(braid, get_lattice):
    samples = [
        (mi((n,)), character_of_cohomology(braid, mi((n,)), 1, get_lattice))
        for n in range(2, 7)
    ]
    poly = fit_character_polynomial(samples, mi((2,)))
    assert poly == X(1) * (X(1) - 1) / 2 + X(2)
    # verify at a level outside the fit window
    chi7 = character_of_cohomology(braid, mi((7,)), 1, get_lattice)
    assert all(poly.evaluate(c) == chi7(c) for c in chi7.values)


def test_fit_two_factor_product(get_lattice):
    spec = family_mkr(2, 1, 1)
    levels = [mi((a, b)) for a in (1, 2, 3) for b in (1, 2, 3)]
    samples = [
        (lv, character_of_cohomology(spec, lv, 1, get_lattice)) for lv in levels
    ]
    poly = fit_character_polynomial(samples, mi((1, 1)))
    assert poly == X(1, 1, 2) * X(1, 2, 2)
    assert poly.multidegree() == mi((1, 1))


def test_fit_constant():
    samples = [(mi((n,)), trivial_character(mi((n,)))) for n in (1, 2)]
    poly = fit_character_polynomial(samples, mi((0,)))
    assert poly == CharacterPolynomial.constant(1)


def test_fit_reproduces_all_samples_exactly(braid, get_lattice):
    jobs = [
        (braid, [mi((n,)) for n in range(2, 7)], 1, mi((2,))),
        (family_mkr(2, 1, 1), [mi((a, b)) for a in (1, 2, 3) for b in (1, 2, 3)], 1, mi((1, 1))),
    ]
    for spec, levels, i, bound in jobs:
        samples = [
            (lv, character_of_cohomology(spec, lv, i, get_lattice)) for lv in levels
        ]
        poly = fit_character_polynomial(samples, bound)
        for level, chi in samples:
            for c in conj_classes(level):
                assert poly.evaluate(c) == chi(c)


def test_fit_inconsistent_signal(braid, get_lattice):
    samples = [
        (mi((n,)), character_of_cohomology(braid, mi((n,)), 1, get_lattice))
        for n in range(2, 7)
    ]
    with pytest.raises(FitInconsistentError):
        fit_character_polynomial(samples, mi((1,)))


def test_fit_underdetermined_signal():
    # 12 monomials within degree (4) but these two levels only give rank 11
    samples = [(mi((n,)), trivial_character(mi((n,)))) for n in (4, 5)]
    with pytest.raises(FitUnderdeterminedError):
        fit_character_polynomial(samples, mi((4,)))


def test_fit_needs_two_levels(braid, get_lattice):
    chi = character_of_cohomology(braid, mi((3,)), 1, get_lattice)
    with pytest.raises(ValueError):
        fit_character_polynomial([(mi((3,)), chi)], mi((2,)))


def test_inner_product_burnside():
    for n in range(1, 7):
        lv = mi((n,))
        assert inner_product(X(1).as_class_function(lv), trivial_character(lv)) == 1


def test_inner_product_permutation_character():
    assert inner_product(
        X(1).as_class_function(mi((1,))), X(1).as_class_function(mi((1,)))
    ) == 1
    for n in range(2, 7):
        lv = mi((n,))
        chi = X(1).as_class_function(lv)
        assert inner_product(chi, chi) == 2


def test_inner_product_trivial():
    lv = mi((4,))
    assert inner_product(trivial_character(lv), trivial_character(lv)) == 1


def test_tensor_and_dual(braid, get_lattice):
    lv = mi((3,))
    chi = character_of_cohomology(braid, lv, 1, get_lattice)
    assert tensor_char(trivial_character(lv), chi) == chi
    x1 = X(1).as_class_function(lv)
    assert tensor_char(x1, x1).identity_value == 9
    assert dual_char(chi) == chi


def test_induction_character_points():
    for n in (3, 4, 5):
        lv = mi((n,))
        ind = induction_character(mi((1,)), trivial_character(mi((1,))), lv)
        assert ind == X(1).as_class_function(lv)


def test_induction_character_pairs():
    ind = induction_character(mi((2,)), trivial_character(mi((2,))), mi((3,)))
    assert dict(ind.values) == {
        ConjClass(((1, 1, 1),)): 3,
        ConjClass(((2, 1),)): 1,
        ConjClass(((3,),)): 0,
    }


def test_induction_character_same_level_is_identity():
    lv = mi((3,))
    chi = X(1).as_class_function(lv)
    assert induction_character(lv, chi, lv) == chi


def test_induction_character_unreachable_level():
    ind = induction_character(mi((3,)), trivial_character(mi((3,))), mi((2,)))
    assert all(v == 0 for v in ind.values.values())


def test_free_decomposition_braid_h1(braid, get_lattice):
    report = verify_free_decomposition(
        braid, 1, [mi((3,)), mi((4,)), mi((5,))], get_lattice
    )
    assert report.passed
    assert [c.degree for c in report.classes] == [mi((2,))]
    chi_gen = report.classes[0].generator_character
    assert all(v == 1 for v in chi_gen.values.values())  # trivial rep of S_2


def test_free_decomposition_braid_h2(braid, get_lattice):
    report = verify_free_decomposition(braid, 2, [mi((4,)), mi((5,))], get_lattice)
    assert report.passed
    assert [c.degree for c in report.classes] == [mi((3,)), mi((4,))]


def test_free_decomposition_k_equals_degree_bound(get_lattice):
    spec = family_mkr(1, 3, 1)
    report = verify_free_decomposition(spec, 1, [mi((3,)), mi((4,))], get_lattice)
    assert report.passed
    assert report.degree_bound == mi((3,))
    assert all(c.degree.leq(mi((3,))) for c in report.classes)


def test_free_decomposition_two_factor(get_lattice):
    spec = family_mkr(2, 1, 1)
    levels = [mi((2, 2)), mi((3, 2)), mi((3, 3))]
    for i in (1, 2):
        report = verify_free_decomposition(spec, i, levels, get_lattice)
        assert report.passed


def test_invariants_dim(braid, get_lattice):
    chi1 = character_of_cohomology(braid, mi((3,)), 1, get_lattice)
    assert invariants_dim(chi1) == 1
    chi2 = character_of_cohomology(braid, mi((4,)), 2, get_lattice)
    assert invariants_dim(chi2) == 0
    assert invariants_dim(trivial_character(mi((4,)))) == 1


def test_invariants_dim_rejects_non_characters():
    lv = mi((2,))
    fake = ClassFunction(
        lv, {c: Fraction(1, 3) for c in conj_classes(lv)}
    )
    with pytest.raises(ValueError):
        invariants_dim(fake)


def test_twisted_betti(braid, get_lattice):
    lv = mi((3,))
    chi = character_of_cohomology(braid, lv, 1, get_lattice)
    x1 = X(1).as_class_function(lv)
    assert twisted_betti(chi, x1) == 2
    assert twisted_betti(chi, trivial_character(lv)) == invariants_dim(chi)
    assert twisted_betti(trivial_character(lv), x1) == 1


def test_irreducible_multiplicities_h1(braid, get_lattice):
    chi = character_of_cohomology(braid, mi((3,)), 1, get_lattice)
    mult = irreducible_multiplicities(chi)
    assert mult[((3,),)] == 1
    assert mult[((2, 1),)] == 1
    assert mult[((1, 1, 1),)] == 0


def test_irreducible_multiplicities_trivial():
    mult = irreducible_multiplicities(trivial_character(mi((5,))))
    assert mult[((5,),)] == 1
    assert all(v == 0 for lam, v in mult.items() if lam != ((5,),))


def test_irreducible_multiplicities_permutation_character():
    mult = irreducible_multiplicities(X(1).as_class_function(mi((4,))))
    assert mult[((4,),)] == 1
    assert mult[((3, 1),)] == 1
    assert all(v == 0 for lam, v in mult.items() if lam not in {((4,),), ((3, 1),)})


def test_irreducible_multiplicities_cost_guard():
    with pytest.raises(ValueError):
        irreducible_multiplicities(trivial_character(mi((9,))))


def test_mn_orthogonality_up_to_six():
    for n in range(1, 7):
        classes = conj_classes(mi((n,)))
        order = group_order(mi((n,)))
        for lam, mu in itertools.combinations_with_replacement(partitions(n), 2):
            ip = (
                sum(
                    Fraction(c.size)
                    * sym_character(lam, c.parts[0])
                    * sym_character(mu, c.parts[0])
                    for c in classes
                )
                / order
            )
            assert ip == (1 if lam == mu else 0)


def test_mn_known_values():
    assert sym_character((2, 1), (1, 1, 1)) == 2
    assert sym_character((2, 1), (2, 1)) == 0
    assert sym_character((2, 1), (3,)) == -1
    assert sym_character((4,), (2, 1, 1)) == 1
    assert sym_character((1, 1, 1, 1), (2, 1, 1)) == -1


def test_engine_multiplicities_are_nonnegative_integers(braid, get_lattice):
    for n, i in [(4, 1), (4, 2), (5, 2)]:
        chi = character_of_cohomology(braid, mi((n,)), i, get_lattice)
        for mult in irreducible_multiplicities(chi).values():
            assert mult.denominator == 1 and mult >= 0


def test_inner_products_stabilize_at_sum_of_degrees():
    pairs = [
        (X(1), X(1)),
        (X(1) * (X(1) - 1) / 2 + X(2), X(1)),
        (X(2), X(2)),
        (X(3), X(1) * X(2)),
        (X(1) * X(1), X(1)),
    ]
    for p, q in pairs:
        onset = p.multidegree()[0] + q.multidegree()[0]
        values = {}
        for n in range(1, 9):
            lv = mi((n,))
            values[n] = inner_product(p.as_class_function(lv), q.as_class_function(lv))
        stable = values[8]
        for n in range(onset, 9):
            assert values[n] == stable, (p.render(), q.render(), n)


def test_stability_report_h1_dims():
    values = {mi((n,)): Fraction(1) for n in (2, 3, 4, 5)}
    report = stability_report(values, mi((2,)))
    assert report.stable_value == 1
    assert report.onsets == (mi((2,)),)
    assert report.meets_prediction


def test_stability_report_inner_product_onset():
    p = X(1) * (X(1) - 1) / 2 + X(2)
    values = {}
    for n in range(2, 8):
        lv = mi((n,))
        values[lv] = inner_product(p.as_class_function(lv), X(1).as_class_function(lv))
    report = stability_report(values, mi((3,)))
    assert report.stable_value == 2
    assert report.onsets == (mi((3,)),)
    assert report.meets_prediction


def test_stability_report_constant_sequence():
    values = {mi((n,)): Fraction(7) for n in (1, 2, 3)}
    report = stability_report(values, mi((0,)))
    assert report.onsets == (mi((1,)),)
    assert report.meets_prediction


def test_stability_report_detects_late_onset():
    values = {mi((1,)): Fraction(0), mi((2,)): Fraction(1), mi((3,)): Fraction(1)}
    report = stability_report(values, mi((1,)))
    assert not report.meets_prediction
    assert report.violations == (mi((1,)),)
