import json
import os

from mvqa.evaluation.harness import CorrelationReport
from mvqa.evaluation.report import make_report, report_rows, sorted_reports


def report(metric, task, srcc, codecs=None, n=10):
    return CorrelationReport(metric, task, 'object_iou', n, srcc,
                             None if srcc is None else srcc / 2.0,
                             codecs or {}, [], 0.001)


def test_ordering():
    reports = [
        report('ssim', 'object', 0.5), report('psnr', 'object', None),
        report('psnr', 'face', 0.5), report('model', 'object', 0.9),
        report('ssim', 'face', None), report('psnr', 'plate', -0.2),
    ]
    ordered = [(r.task, r.metric) for r in sorted_reports(reports)]
    assert ordered == [
        ('object', 'model'), ('face', 'psnr'), ('object', 'ssim'),
        ('plate', 'psnr'), ('face', 'ssim'), ('object', 'psnr'),
    ]


def test_rows():
    rows = report_rows([
        report('psnr', 'object', None, n=2),
        report('ssim', 'object', 0.123456789,
               {'x264': None, 'jpeg': 0.98765432}),
    ])
    assert rows == [
        ['ssim', 'object', '10', '0.123457', '0.061728',
         '{"jpeg":0.987654,"x264":null}'],
        ['psnr', 'object', '2', '', '', '{}'],
    ]


def test_make_report(tmp_path):
    reports = [report('psnr', 'object', 0.4, {'jpeg': 0.4}),
               report('ssim', 'object', 0.6, {'jpeg': 0.6}),
               report('psnr', 'plate', None)]
    out = str(tmp_path / 'report')
    written = make_report(reports, out, {'detector': 0.02})

    assert sorted(os.path.basename(p) for p in written) == [
        'report.csv', 'report.json', 'srcc_object.png', 'srcc_plate.png'
    ]
    with open(os.path.join(out, 'report.csv'), encoding='utf-8') as f:
        lines = f.read().splitlines()
    assert lines[0] == 'metric,task,n,srcc,plcc,codec_breakdown_json'
    assert [l.split(',')[0] for l in lines[1:]] == ['ssim', 'psnr', 'psnr']

    with open(os.path.join(out, 'report.json'), encoding='utf-8') as f:
        data = json.load(f)
    assert [r['metric'] for r in data['reports']] == ['ssim', 'psnr', 'psnr']
    assert data['timings']['backends'] == {'detector': 0.02}
    assert data['timings']['metrics']['object/ssim'] == 0.001

    with open(os.path.join(out, 'srcc_object.png'), 'rb') as f:
        assert f.read(8) == b'\x89PNG\r\n\x1a\n'


def test_report_is_reproducible(tmp_path):
    reports = [report('psnr', 'object', 0.4), report('ssim', 'object', 0.6)]
    make_report(reports, str(tmp_path / 'a'))
    make_report(list(reversed(reports)), str(tmp_path / 'b'))
    for name in ('report.csv', 'report.json'):
        with open(str(tmp_path / 'a' / name), 'rb') as f:
            a = f.read()
        with open(str(tmp_path / 'b' / name), 'rb') as f:
            assert f.read() == a
