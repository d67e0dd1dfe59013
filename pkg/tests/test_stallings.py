from iwip.stallings import basis_inverse, generates_free_group, stallings_fold
from iwip.words import parse_word


def W(s):
    return parse_word(s)


def test_fold_of_basis_is_rose():
    G = stallings_fold([W("a"), W("b")])
    assert G.is_full_rose(2)
    assert G.rank() == 2


def test_membership():
    G = stallings_fold([W("aa"), W("b")])
    assert G.contains(W("aab"))
    assert not G.contains(W("a"))


def test_free_basis_of_cyclic_subgroup():
    G = stallings_fold([W("abAB"), W("abABabAB")])
    basis = G.free_basis()
    assert len(basis) == 1


def test_generates_free_group():
    assert generates_free_group([W("ab"), W("b")], 2)
    assert not generates_free_group([W("aa"), W("b")], 2)


def test_basis_inverse():
    imgs = (W("ab"), W("a"))
    inv = basis_inverse(imgs, 2)
    # phi(a) = ab, phi(b) = a, so phi^-1(a) = b and phi^-1(b) = Ba
    assert inv == (W("b"), W("Ba"))
