"""
Contains all kinds of targets that the target stage can compute.
"""

DETECTION_TASKS = ('object', 'face', 'plate')


class TargetKind(object):
    @classmethod
    def name(cls):
        """
        Returns the name under which rows of this kind are written.
        :rtype: str
        """
        raise NotImplementedError

    @classmethod
    def description(cls):
        """
        Returns a short (one liner) description of the kind.
        :rtype: str
        """
        raise NotImplementedError

    @classmethod
    def higher_is_better(cls):
        """
        Returns True if a higher value means the machine-vision task went
        better on the compressed input.
        :rtype: bool
        """
        raise NotImplementedError

    @classmethod
    def tasks(cls):
        """
        Returns the task tags for which this target is defined.
        :rtype: tuple[str]
        """
        raise NotImplementedError

    @classmethod
    def per_frame(cls):
        """
        Returns True if one value is computed per frame rather than per
        object.
        :rtype: bool
        """
        return False


class MeanIoU(TargetKind):
    @classmethod
    def name(cls):
        return "mean_iou"

    @classmethod
    def description(cls):
        return "average matched IoU over the objects of a compressed frame"

    @classmethod
    def higher_is_better(cls):
        return True

    @classmethod
    def tasks(cls):
        return DETECTION_TASKS + ('general',)

    @classmethod
    def per_frame(cls):
        return True


class ObjectIoU(TargetKind):
    @classmethod
    def name(cls):
        return "object_iou"

    @classmethod
    def description(cls):
        return "IoU of the detection matched to an object in a compressed frame"

    @classmethod
    def higher_is_better(cls):
        return True

    @classmethod
    def tasks(cls):
        return DETECTION_TASKS + ('general',)


class DeltaObjectIoU(TargetKind):
    @classmethod
    def name(cls):
        return "delta_object_iou"

    @classmethod
    def description(cls):
        return "Object IoU lost between the reference and the compressed frame"

    @classmethod
    def higher_is_better(cls):
        return False

    @classmethod
    def tasks(cls):
        return DETECTION_TASKS + ('general',)


class FaceDelta(TargetKind):
    @classmethod
    def name(cls):
        return "face_delta"

    @classmethod
    def description(cls):
        return "cosine similarity to the database image lost by compression"

    @classmethod
    def higher_is_better(cls):
        return False

    @classmethod
    def tasks(cls):
        return ('face_recognition',)


class Jaro(TargetKind):
    @classmethod
    def name(cls):
        return "jaro"

    @classmethod
    def description(cls):
        return "Jaro similarity of the plate read on the compressed crop"

    @classmethod
    def higher_is_better(cls):
        return True

    @classmethod
    def tasks(cls):
        return ('plate',)


class JaroFrame(TargetKind):
    @classmethod
    def name(cls):
        return "jaro_frame"

    @classmethod
    def description(cls):
        return "Jaro similarity averaged over the plates matched in a frame"

    @classmethod
    def higher_is_better(cls):
        return True

    @classmethod
    def tasks(cls):
        return ('plate',)

    @classmethod
    def per_frame(cls):
        return True


ALL_KINDS = (MeanIoU, ObjectIoU, DeltaObjectIoU, FaceDelta, Jaro, JaroFrame)


def kind_by_name(name):
    """
    :param str name: A target name.
    :rtype: type
    :raise KeyError: if no kind has this name.
    """
    for kind in ALL_KINDS:
        if kind.name() == name:
            return kind
    raise KeyError('unknown target {!r}, expected one of {}'.format(
        name, ', '.join(k.name() for k in ALL_KINDS)
    ))


def check_compatible(task, target):
    """
    :param str task: A task tag.
    :param str target: A target name.
    :raise ValueError: if the target is not defined for the task.
    """
    kind = kind_by_name(target)
    if task not in kind.tasks():
        raise ValueError('target {} is not defined for task {} (allowed: {})'
                         .format(target, task, ', '.join(kind.tasks())))
