from funcy import memoize

from mvqa.core.utils import Bunch


class Digraph(object):
    """
    Represents a simple directed graph. Used to render pipeline schedules.
    """

    class Node(object):
        """
        A node of the digraph. Can contain arbitrary data.
        """
        def __init__(self, name, **data):
            self.name = name
            self.data = Bunch(**data)

        def __repr__(self):
            return "{}{}".format(self.name, repr(self.data))

    class Edge(object):
        def __init__(self, frm, to):
            self.frm = frm
            self.to = to

        def __hash__(self):
            return (self.frm, self.to).__hash__()

        def __repr__(self):
            return "({} -> {})".format(repr(self.frm), repr(self.to))

    def __init__(self, nodes, edges):
        """
        :param list[Digraph.Node] nodes: The nodes, in display order.
        :param list[Digraph.Edge] edges: The edges.
        """
        self.nodes = nodes
        self.edges = edges

    @memoize
    def successors(self, node):
        """
        Returns the direct successors of the given node, in node order.

        :rtype: list[Digraph.Node]
        """
        targets = {id(e.to) for e in self.edges if e.frm is node}
        return [n for n in self.nodes if id(n) in targets]

    def __repr__(self):
        return "({}, {})".format(self.nodes, self.edges)
