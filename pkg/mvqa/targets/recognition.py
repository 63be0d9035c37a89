"""
Recognition degradation targets: the face-recognition similarity delta and
the plate-recognition Jaro score, plus the edit distance used to
deduplicate plates.
"""

from dataclasses import dataclass
from fractions import Fraction

import Levenshtein

from mvqa.core.errors import BackendError, InvalidEmbeddingError
from mvqa.core.similarity import cosine_similarity
from mvqa.core.types import ImageRef, PlateString
from mvqa.core.utils import mean_or_none


@dataclass(frozen=True)
class FacePairRecord(object):
    person_id: str
    database_image: ImageRef
    reference_query: ImageRef
    compressed_query: ImageRef
    r_ref: float
    r_compr: float
    f_delta: float

    @staticmethod
    def from_embeddings(person_id, database_image, reference_query,
                        compressed_query, ref, compr, database):
        """
        :param EmbeddingVector ref: The embedding of the reference query.
        :param EmbeddingVector compr: The embedding of the compressed query.
        :param EmbeddingVector database: The embedding of the database image.
        :rtype: FacePairRecord
        """
        r_ref = cosine_similarity(ref, database)
        r_compr = cosine_similarity(compr, database)
        return FacePairRecord(person_id, database_image, reference_query,
                              compressed_query, r_ref, r_compr,
                              r_ref - r_compr)


@dataclass(frozen=True)
class PlateTargetRecord(object):
    frame_id: str
    plate_id: int
    gt_string: PlateString
    recognized_string: PlateString
    jaro: float

    @staticmethod
    def create(frame_id, plate_id, gt_string, recognized_string):
        return PlateTargetRecord(frame_id, plate_id, gt_string,
                                 recognized_string,
                                 jaro_similarity(gt_string, recognized_string))


def _chars(s):
    return s.chars if isinstance(s, PlateString) else s


def embed_checked(embedder, image):
    """
    Runs an embedder, turning unexpected failures into BackendError.

    :rtype: EmbeddingVector
    """
    try:
        return embedder.embed(image)
    except (InvalidEmbeddingError, BackendError):
        raise
    except Exception as e:
        raise BackendError('embedder {} failed: {}'.format(
            embedder.name(), e
        )) from e


def face_similarity(a, b, embedder):
    """
    :param ImageRef a: A face image.
    :param ImageRef b: Another face image.
    :param FaceEmbedder embedder: The recognition backend.
    :rtype: float
    """
    return cosine_similarity(embed_checked(embedder, a),
                             embed_checked(embedder, b))


def face_delta_from_embeddings(ref, compr, database):
    """
    Same as face_delta on embeddings which were already computed.

    :rtype: float
    """
    return cosine_similarity(ref, database) - cosine_similarity(compr, database)


def face_delta(ref, compr, database, embedder):
    """
    Returns how much less the compressed query resembles the database image
    than the reference query does. Not clamped: compression may help.

    :param ImageRef ref: The reference (uncompressed) query.
    :param ImageRef compr: The compressed query.
    :param ImageRef database: The database image of the same person.
    :param FaceEmbedder embedder: The recognition backend.
    :rtype: float
    """
    return face_similarity(ref, database, embedder) - \
        face_similarity(compr, database, embedder)


def _jaro_fraction(s1, s2):
    # m and t are symmetric in theory, but the order in which matches are
    # taken is not: compute from a canonical orientation.
    if (len(s1), s1) > (len(s2), s2):
        s1, s2 = s2, s1

    if len(s1) == 0 or len(s2) == 0:
        return Fraction(0)

    window = max(0, max(len(s1), len(s2)) // 2 - 1)
    matched2 = [False] * len(s2)
    matches1 = []

    for i, c in enumerate(s1):
        lo, hi = max(0, i - window), min(len(s2), i + window + 1)
        for j in range(lo, hi):
            if not matched2[j] and s2[j] == c:
                matched2[j] = True
                matches1.append(c)
                break

    m = len(matches1)
    if m == 0:
        return Fraction(0)

    matches2 = [c for j, c in enumerate(s2) if matched2[j]]
    t = Fraction(sum(a != b for a, b in zip(matches1, matches2)), 2)

    return (Fraction(m, len(s1)) + Fraction(m, len(s2)) +
            (m - t) / m) / 3


def jaro_similarity(s1, s2):
    """
    Returns the Jaro similarity of two strings. Two empty strings have no
    matching character and score 0.

    :param PlateString | str s1: The first string.
    :param PlateString | str s2: The second string.
    :rtype: float
    """
    return float(_jaro_fraction(_chars(s1), _chars(s2)))


def plate_frame_score(matched_plates):
    """
    Averages the Jaro similarity over the plates matched in a frame. Returns
    None for a frame without matched plates.

    :param list[(PlateString, PlateString)] matched_plates: Pairs of ground
        truth and recognized strings.
    :rtype: float | None
    """
    return mean_or_none(jaro_similarity(gt, rec) for gt, rec in matched_plates)


def levenshtein(s1, s2):
    """
    :param PlateString | str s1: The first string.
    :param PlateString | str s2: The second string.
    :rtype: int
    """
    return Levenshtein.distance(_chars(s1), _chars(s2))
