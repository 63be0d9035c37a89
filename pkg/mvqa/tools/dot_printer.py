"""
Renders a Digraph in the DOT language. Node identifiers are positional so
that the output only depends on the graph.
"""

from html import escape

_LINES = '#4c4c4c'
_TITLE = '#107896'
_LABEL = '#202020'


def _colored(text, color):
    return '<font color="{}" face="Sans">{}</font>'.format(color, text)


def _table(title, rows):
    result = [
        '<table color="#404040" cellborder="0">',
        '<tr><td colspan="2"><b>{}</b></td></tr>'.format(
            _colored(escape(title), _TITLE)
        )
    ]
    for key, value in rows:
        result.append(
            ('<hr/><tr><td align="left">{}</td>'
             '<td align="left">{}</td></tr>').format(
                _colored(key, _LABEL), _colored(value, _LABEL)
            )
        )
    result.append('</table>')
    return ''.join(result)


class DataPrinter(object):
    """
    Renders the value stored under a key of a node's data as a (key, value)
    table row.
    """
    def __init__(self, data_key, printer=None):
        """
        :param str data_key: The key to look up.
        :param (object)->(str, str) | None printer: The renderer. Defaults to
            the escaped key and repr of the value.
        """
        self.data_key = data_key
        self.printer = printer or (
            lambda value: (escape(data_key), escape(repr(value)))
        )

    def test(self, node):
        return self.data_key in node.data

    def __call__(self, node):
        return self.printer(node.data[self.data_key])


def gen_dot(digraph, data_printers):
    """
    Generates a DOT representation of the given digraph. Each node is drawn
    as a table with one row per data printer that applies to it.

    :param Digraph digraph: The graph to render.
    :param list[DataPrinter] data_printers: The data printers to use.
    :rtype: str
    """
    ids = {id(node): 'n{}'.format(i) for i, node in enumerate(digraph.nodes)}
    lines = []

    for node in digraph.nodes:
        rows = [p(node) for p in data_printers if p.test(node)]
        lines.append('{} [label=<{}>, shape=rectangle, penwidth=0];'.format(
            ids[id(node)], _table(node.name, rows)
        ))
        for succ in digraph.successors(node):
            lines.append('{} -> {} [color="{}"];'.format(
                ids[id(node)], ids[id(succ)], _LINES
            ))

    return ('digraph g {\n'
            'graph [rankdir="TB", splines=true, fontname="Sans"];\n' +
            '\n'.join(lines) + '\n}\n')
