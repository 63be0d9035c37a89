import itertools
from fractions import Fraction

import numpy as np
import pytest

from mvqa.backends.synthetic import SyntheticEmbedder
from mvqa.core.errors import BackendError, InvalidEmbeddingError
from mvqa.core.types import ImageRef, PlateString
from mvqa.dataset.synthetic import identity_pattern, person_image
from mvqa.targets.recognition import (
    FacePairRecord, PlateTargetRecord, face_delta, face_delta_from_embeddings,
    face_similarity, jaro_similarity, levenshtein, plate_frame_score
)
from testsuite_support.oracles import (
    OracleTest, dp_levenshtein, textbook_jaro, textbook_jaro_both
)

ALPHABET = 'ABCD'


def random_string(rng, max_length=6):
    n = int(rng.integers(0, max_length + 1))
    return ''.join(rng.choice(list(ALPHABET), size=n))


class JaroOracleTest(OracleTest):
    def instances(self, rng):
        while True:
            yield random_string(rng), random_string(rng)

    def concrete(self, s1, s2):
        # shorter string first, ties broken alphabetically
        first, second = sorted((s1, s2), key=lambda s: (len(s), s))
        return textbook_jaro(first, second)

    def implementation(self, s1, s2):
        return jaro_similarity(s1, s2)


class LevenshteinOracleTest(OracleTest):
    def __init__(self):
        super(LevenshteinOracleTest, self).__init__(tolerance=0)

    def instances(self, rng):
        while True:
            yield random_string(rng, 8), random_string(rng, 8)

    def concrete(self, s1, s2):
        return dp_levenshtein(s1, s2)

    def implementation(self, s1, s2):
        return levenshtein(s1, s2)


def test_jaro_against_textbook():
    JaroOracleTest().run()


def test_jaro_is_symmetric_and_textbook_in_some_orientation():
    rng = np.random.default_rng(11)
    for _ in range(2000):
        s1, s2 = random_string(rng, 8), random_string(rng, 8)
        forward, backward = textbook_jaro_both(s1, s2)
        value = jaro_similarity(s1, s2)
        assert value == jaro_similarity(s2, s1)
        assert min(abs(value - forward), abs(value - backward)) < 1e-12


def test_levenshtein_against_dynamic_programming():
    LevenshteinOracleTest().run()


@pytest.mark.parametrize('s1, s2, expected', [
    ('ABC', 'ABC', Fraction(1)),
    ('ABC', 'XYZ', Fraction(0)),
    ('MARTHA', 'MARHTA', Fraction(17, 18)),
    ('DIXON', 'DICKSONX', Fraction(23, 30)),
    ('CRATE', 'TRACE', Fraction(11, 15)),
    ('', '', Fraction(0)),
    ('A', '', Fraction(0)),
])
def test_jaro_golden_values(s1, s2, expected):
    assert jaro_similarity(s1, s2) == float(expected)
    assert jaro_similarity(s2, s1) == float(expected)


def test_jaro_is_one_iff_equal():
    for n in range(0, 4):
        for s1 in map(''.join, itertools.product('AB', repeat=n)):
            for s2 in map(''.join, itertools.product('AB', repeat=n)):
                assert (jaro_similarity(s1, s2) == 1.0) == \
                    (s1 == s2 and n > 0)


def test_jaro_accepts_plate_strings():
    assert jaro_similarity(PlateString('MARTHA'), 'MARHTA') == 17.0 / 18.0


@pytest.mark.parametrize('s1, s2, expected', [
    ('', 'ABC', 3), ('KITTEN', 'SITTING', 3), ('ABC', 'ABC', 0),
])
def test_levenshtein_examples(s1, s2, expected):
    assert levenshtein(s1, s2) == expected


def test_levenshtein_metric_properties():
    rng = np.random.default_rng(5)
    for _ in range(500):
        a, b, c = (random_string(rng, 7) for _ in range(3))
        assert levenshtein(a, c) <= levenshtein(a, b) + levenshtein(b, c)
        assert levenshtein(a, b) >= abs(len(a) - len(b))
        assert levenshtein(a, b) == levenshtein(b, a)


def test_plate_frame_score():
    assert plate_frame_score([]) is None
    score = plate_frame_score([('ABC', 'ABC'), ('ABC', 'XYZ')])
    assert score == 0.5


def faces(seed, count):
    rng = np.random.default_rng(seed)
    pattern = identity_pattern(rng)
    return [ImageRef.from_array(person_image(rng, pattern))
            for _ in range(count)]


def test_face_delta_identities():
    embedder = SyntheticEmbedder()
    ref, compr, db = faces(6, 3)
    assert face_delta(ref, ref, db, embedder) == 0.0
    assert face_delta(ref, compr, db, embedder) == \
        -face_delta(compr, ref, db, embedder)
    assert face_similarity(ref, db, embedder) == pytest.approx(
        face_similarity(db, ref, embedder), abs=1e-12
    )


def test_face_delta_propagates_embedding_failures():
    embedder = SyntheticEmbedder()
    ref, db = faces(7, 2)
    blank = ImageRef.from_array(np.full((64, 64), 90, dtype=np.uint8))
    with pytest.raises(InvalidEmbeddingError):
        face_delta(ref, blank, db, embedder)


class BrokenEmbedder(SyntheticEmbedder):
    def embed(self, image):
        raise KeyError('no such layer')


def test_unexpected_embedder_failures_become_backend_errors():
    ref, db = faces(8, 2)
    with pytest.raises(BackendError):
        face_similarity(ref, db, BrokenEmbedder())


def test_face_pair_record():
    embedder = SyntheticEmbedder()
    ref, compr, db = faces(9, 3)
    vectors = [embedder.embed(image) for image in (ref, compr, db)]
    record = FacePairRecord.from_embeddings('person0009', db, ref, compr,
                                            *vectors)
    assert record.f_delta == record.r_ref - record.r_compr
    assert record.f_delta == face_delta_from_embeddings(*vectors)
    assert record.f_delta == pytest.approx(
        face_delta(ref, compr, db, embedder), abs=1e-12
    )


def test_plate_target_record():
    record = PlateTargetRecord.create('frame000001', 2, PlateString('MARTHA'),
                                      PlateString('MARHTA'))
    assert record.plate_id == 2
    assert record.jaro == pytest.approx(17 / 18, abs=1e-12)
