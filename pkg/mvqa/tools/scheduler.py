from collections import Counter

from mvqa.core.utils import StopWatch, valueclass


class Task(object):
    def requires(self):
        """
        Returns the results that this task requires, as a dictionary from
        argument name to requirement.

        :rtype: dict[str, Requirement]
        """
        return {}

    def provides(self):
        """
        Returns the results that this task provides, as a dictionary from
        result name to requirement.

        :rtype: dict[str, Requirement]
        """
        raise NotImplementedError

    def comparison_key(self):
        """
        Returns a key that orders tasks of a same batch, so that the execution
        order is identical across runs.

        :rtype: object
        """
        return repr(self)

    def contributes_to(self):
        """
        Returns an iterable of subgoals which this task contributes to
        achieving. A subgoal can be any hashable object.

        :rtype: iterable[object]
        """
        return []

    def run(self, **kwargs):
        """
        :param **object kwargs: The actual results required by this task.
        :rtype: dict[str, object]: The actual results provided by this task.
        """
        raise NotImplementedError


class Requirement(object):
    def providers(self):
        """
        Returns the tasks able to build this requirement, in order of
        preference. The scheduler uses the first one.

        :rtype: list[Task]
        """
        raise NotImplementedError

    @staticmethod
    def as_requirement(provider):
        """
        Creates a requirement from a single function that returns a list of
        tasks. The parameters of the function become attributes of the
        requirement.

        Use as an annotation.

        :param function provider: The function which returns a list of tasks.
        :rtype: type
        """
        def init(self, *args):
            self.args = tuple(args)

        def providers(self):
            return provider(*self.args)

        cls = type(provider.__name__, (Requirement,), {
            '__init__': init,
            'providers': providers,
            '__doc__': provider.__doc__
        })

        return valueclass(cls)


class Schedule(object):
    def __init__(self, batches, spec):
        """
        :param list[set[Task]] batches: Sets of tasks which only depend on
            tasks of earlier batches.
        :param dict[str, Requirement] spec: The desired results.
        """
        self.batches = batches
        self.spec = spec
        self.stopwatch = StopWatch()

    def tasks(self):
        """
        Returns every task of the schedule in execution order.

        :rtype: list[Task]
        """
        return [
            task
            for batch in self.batches
            for task in sorted(batch, key=lambda t: t.comparison_key())
        ]

    def run(self, on_subgoal_achieved=None):
        """
        Runs the schedule. The time spent in each task is accumulated in
        this schedule's stopwatch under the task's class name.

        :param (object)->None | None on_subgoal_achieved: Called as soon as
            every task contributing to a subgoal has run.
        :rtype: dict[str, object]
        """
        tasks = self.tasks()
        pending = Counter(
            subgoal for task in tasks for subgoal in task.contributes_to()
        )

        acc = {}
        for task in tasks:
            kwargs = {name: acc[req] for name, req in task.requires().items()}
            with self.stopwatch.measure(type(task).__name__):
                task_res = task.run(**kwargs)
            for name, prov in task.provides().items():
                acc[prov] = task_res[name]

            for subgoal in task.contributes_to():
                pending[subgoal] -= 1
                if pending[subgoal] == 0 and on_subgoal_achieved is not None:
                    on_subgoal_achieved(subgoal)

        return {name: acc[req] for name, req in self.spec.items()}

    def __repr__(self):
        return '\n'.join(repr(b) for b in self.batches)


class Scheduler(object):
    def schedule(self, spec):
        """
        Collects the tasks needed to produce the given requirements, walking
        up the dependency chains, and orders them in batches.

        :param dict[str, Requirement] spec: The specification, as a map
            from name to requirement.
        :rtype: Schedule
        :raise ValueError: if the requirements depend on each other cyclically
            or if a requirement has no provider.
        """
        tasks = set()
        seen = set()
        todo = list(spec.values())

        while todo:
            req = todo.pop()
            if req in seen:
                continue
            seen.add(req)
            providers = req.providers()
            if len(providers) == 0:
                raise ValueError('no provider for {!r}'.format(req))
            tasks.add(providers[0])
            todo.extend(providers[0].requires().values())

        batches = []
        task_to_reqs = {t: set(t.requires().values()) for t in tasks}
        while task_to_reqs:
            ready = {t for t, reqs in task_to_reqs.items() if not reqs}
            if not ready:
                raise ValueError("Cyclic dependency found")
            batches.append(ready)
            for task in ready:
                del task_to_reqs[task]
            produced = {
                req for task in ready for req in task.provides().values()
            }
            for reqs in task_to_reqs.values():
                reqs.difference_update(produced)

        return Schedule(batches, spec)
