"""Smoke test for the endofix_py extension module.

Builds nothing itself. Either install the extension (see README) or build
the cdylib with cargo and point PYTHONPATH at a directory containing
endofix_py.so, e.g.:

    cargo build -p endofix-py --release
    ln -sf "$PWD"/target/release/libendofix_py.so /tmp/pylib/endofix_py.so
    PYTHONPATH=/tmp/pylib python3 python/smoke_test.py
"""

import json

import endofix_py as ef


def main():
    w = ef.Word("aB")
    assert str(w) == "aB"
    assert len(w) == 2
    assert str(w.inverse()) == "bA"
    assert str(w * w.inverse()) == "1"
    assert w.letters() == [1, -2]
    assert str(ef.Word("ab").conjugate_by(ef.Word("a"))) == "ba"
    assert str(ef.Word("ab").conjugate_by(ef.Word("b"))) == "Bab"

    phi = ef.Endomorphism.parse("rank: 2\na -> a\nb -> Bab")
    assert phi.rank() == 2
    assert str(phi.image(2)) == "Bab"
    assert str(phi.apply(ef.Word("ba"))) == "Baba"
    assert phi.is_injective()
    assert not phi.power(3).is_surjective() or phi.is_surjective()
    assert phi.abelianization() == [[1, 0], [0, 1]]

    fixed = {str(u) for u in phi.fixed_words(2)}
    assert "1" in fixed and "a" in fixed

    sub = ef.Subgroup([ef.Word("ab"), ef.Word("ba")], 2)
    assert sub.rank() == 2
    assert sub.contains(ef.Word("ab"))
    assert not sub.contains(ef.Word("a"))

    report = json.loads(ef.analyze_json(phi, k_max=1, rank_cutoff=6))
    classes = [c for c in report["classes"] if c["index"] != 0]
    assert len(classes) == 1, classes
    assert classes[0]["index"] == -1
    assert report["totals"]["jwz_sum"] == -1

    # constructor from images, identity, equality
    same = ef.Endomorphism([ef.Word("a"), ef.Word("Bab")])
    assert same == phi
    assert ef.Endomorphism.identity(2).apply(ef.Word("abAB")) == ef.Word("abAB")

    print("smoke test passed")


if __name__ == "__main__":
    main()
