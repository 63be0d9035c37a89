"""
Writes the evaluation report: a CSV table, a JSON dump with the scored
series and one bar chart of SRCC per task.
"""

import json
import os

from mvqa.tools.files import atomic_open, write_csv, write_json

REPORT_COLUMNS = ('metric', 'task', 'n', 'srcc', 'plcc',
                  'codec_breakdown_json')


def _fmt(value):
    return '' if value is None else '{:.6f}'.format(value)


def sorted_reports(reports):
    """
    Orders reports by decreasing SRCC, undefined ones last. Ties are broken
    by task then metric name.

    :param list[CorrelationReport] reports: The reports.
    :rtype: list[CorrelationReport]
    """
    return sorted(reports, key=lambda r: (
        r.srcc is None, -(r.srcc or 0.0), r.task, r.metric
    ))


def report_rows(reports):
    """
    :param list[CorrelationReport] reports: The reports.
    :rtype: list[list[str]]
    """
    return [
        [r.metric, r.task, str(r.n), _fmt(r.srcc), _fmt(r.plcc),
         json.dumps({c: None if v is None else round(v, 6)
                     for c, v in sorted(r.codec_srcc.items())},
                    sort_keys=True, separators=(',', ':'))]
        for r in sorted_reports(reports)
    ]


def _bar_chart(path, task, reports):
    import matplotlib
    matplotlib.use('Agg')
    import matplotlib.pyplot as plt

    names = [r.metric for r in reports]
    values = [r.srcc if r.srcc is not None else 0.0 for r in reports]
    fig, ax = plt.subplots(figsize=(max(4.0, 1.2 * len(names)), 3.6),
                           constrained_layout=True)
    ax.bar(names, values, color=['#4c72b0' if r.srcc is not None
                                 else '#bbbbbb' for r in reports])
    ax.set_title('SRCC per metric ({})'.format(task))
    ax.set_ylabel('SRCC')
    ax.set_ylim(-1.0, 1.0)
    ax.axhline(0.0, color='black', linewidth=0.8)
    ax.grid(True, axis='y', alpha=0.3)
    with atomic_open(path, 'wb') as f:
        fig.savefig(f, format='png', dpi=100, metadata={'Software': None})
    plt.close(fig)


def make_report(reports, out_dir, timings=None):
    """
    Writes report.csv, report.json and one `srcc_<task>.png` per task into
    the given directory.

    :param list[CorrelationReport] reports: The reports.
    :param str out_dir: The output directory.
    :param dict | None timings: Seconds per item of other components (the
        vision backends), reported next to the metrics' own timings.
    :rtype: list[str]
    :return: The written files.
    """
    os.makedirs(out_dir, exist_ok=True)
    ordered = sorted_reports(reports)
    written = []

    csv_path = os.path.join(out_dir, 'report.csv')
    write_csv(csv_path, REPORT_COLUMNS, report_rows(ordered))
    written.append(csv_path)

    json_path = os.path.join(out_dir, 'report.json')
    write_json(json_path, {
        'reports': [r.as_dict() for r in ordered],
        'timings': {
            'metrics': {
                '{}/{}'.format(r.task, r.metric): r.seconds_per_item
                for r in ordered
            },
            'backends': dict(sorted((timings or {}).items())),
        },
    })
    written.append(json_path)

    for task in sorted({r.task for r in ordered}):
        png_path = os.path.join(out_dir, 'srcc_{}.png'.format(task))
        _bar_chart(png_path, task, [r for r in ordered if r.task == task])
        written.append(png_path)

    return written
