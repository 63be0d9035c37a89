class MetricPlugin(object):
    """
    A quality metric under evaluation. A metric module exports a `metric`
    class deriving from this one; the evaluation creates it through
    `create` with the options of the configuration.
    """
    FULL_REFERENCE = 'full'
    NO_REFERENCE = 'none'

    @classmethod
    def name(cls):
        """
        Returns the name of the metric, as it appears in reports.
        :rtype: str
        """
        raise NotImplementedError

    @classmethod
    def description(cls):
        """
        Returns a short (one liner) description of the metric.
        :rtype: str
        """
        raise NotImplementedError

    def display_name(self):
        """
        Returns the name of this instance in reports. Defaults to `name`.
        :rtype: str
        """
        return self.name()

    @classmethod
    def create(cls, **options):
        """
        :rtype: MetricPlugin
        """
        return cls(**options)

    def reference(self):
        """
        Returns FULL_REFERENCE if the metric compares the distorted input with
        its reference, NO_REFERENCE if it only looks at the distorted one.
        :rtype: str
        """
        return MetricPlugin.FULL_REFERENCE

    def higher_is_better(self):
        """
        :rtype: bool
        """
        raise NotImplementedError

    def score(self, item):
        """
        :param EvaluationItem item: The reference and distorted pixels.
        :rtype: float
        """
        raise NotImplementedError
