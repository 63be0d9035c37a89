"""
Contains the exceptions raised across the package.
"""


class InvalidEmbeddingError(ValueError):
    """
    Raised when an embedding cannot be used for cosine similarity (zero norm,
    wrong length, non-finite entries), or when an embedder finds no face.
    """


class ImageMismatchError(ValueError):
    """
    Raised when two images which are compared do not share dimensions or bit
    depth.
    """


class BackendError(RuntimeError):
    """
    Raised when a vision backend fails to process an image.
    """


class EncoderError(RuntimeError):
    """
    Raised when an encode/decode round trip fails. Carries what the external
    process printed so that it can be reported.
    """
    def __init__(self, msg, stdout='', stderr=''):
        super(EncoderError, self).__init__(msg)
        self.stdout = stdout
        self.stderr = stderr

    def diagnostics(self):
        """
        :rtype: str
        """
        return '{}\n--- stdout ---\n{}\n--- stderr ---\n{}'.format(
            self, self.stdout, self.stderr
        )


class SchemaVersionError(ValueError):
    def __init__(self, what, expected, found):
        super(SchemaVersionError, self).__init__(
            '{}: expected schema version {}, found {}'.format(
                what, expected, found
            )
        )
        self.expected = expected
        self.found = found


class ModelConfigError(ValueError):
    def __init__(self, key, expected, found):
        super(ModelConfigError, self).__init__(
            'model {} mismatch: expected {!r}, found {!r}'.format(
                key, expected, found
            )
        )
        self.key = key
        self.expected = expected
        self.found = found


class ModelInputError(ValueError):
    pass


class TrainingDivergedError(RuntimeError):
    pass


class ConfigError(ValueError):
    pass


class StageError(RuntimeError):
    """
    Raised by a pipeline stage that cannot complete.
    """
