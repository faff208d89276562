"""
Report Generator
Creates human-readable run and comparison reports.
"""
import json
from datetime import datetime
from io import BytesIO
from typing import Any, Dict, List, Optional
from xml.sax.saxutils import escape

import markdown
from jinja2 import Template
from reportlab.lib import colors
from reportlab.lib.enums import TA_CENTER
from reportlab.lib.pagesizes import letter
from reportlab.lib.styles import ParagraphStyle, getSampleStyleSheet
from reportlab.lib.units import inch
from reportlab.platypus import Paragraph, SimpleDocTemplate, Spacer, Table, TableStyle

METRIC_LABELS = {"am": "AM throughput", "gm": "GM throughput", "hm": "HM throughput"}

HTML_TEMPLATE = Template("""<!DOCTYPE html>
<html>
<head>
    <title>{{ title }}</title>
    <style>
        body { font-family: Arial, sans-serif; max-width: 1200px; margin: 0 auto; padding: 20px; }
        h1, h2, h3 { color: #333; }
        table { border-collapse: collapse; }
        th, td { border: 1px solid #ccc; padding: 4px 8px; text-align: right; }
        th { background: #f4f4f4; }
    </style>
</head>
<body>
{{ body }}
</body>
</html>""")


def _fmt(value: Optional[float], digits: int = 1) -> str:
    if value is None:
        return "-"
    return f"{value:,.{digits}f}"


def _is_comparison(report: Dict[str, Any]) -> bool:
    return "rows" in report


class ReportGenerator:
    """Generates run and comparison reports in various formats."""

    @staticmethod
    def _metric_rows(summary: Dict[str, Any]) -> List[List[str]]:
        rows = []
        for metric, label in METRIC_LABELS.items():
            stats = summary.get("metrics", {}).get(metric)
            if stats:
                rows.append([label, _fmt(stats["q1"]), _fmt(stats["median"]), _fmt(stats["q3"])])
        return rows

    @staticmethod
    def _comparison_rows(report: Dict[str, Any]) -> List[List[str]]:
        rows = []
        for row in report["rows"]:
            rows.append([
                row["scheduler"],
                _fmt(row.get("am_median")),
                _fmt(row.get("gm_median")),
                _fmt(row.get("hm_median")),
                _fmt(row.get("latency_train_ms"), 3),
                _fmt(row.get("latency_test_ms"), 3),
            ])
        return rows

    @staticmethod
    def generate_markdown(report: Dict[str, Any]) -> str:
        """Generate Markdown format report."""
        md = []
        if _is_comparison(report):
            md.append("# Scheduler Comparison Report\n")
            md.append(f"**Generated:** {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}\n")
            md.append("## Network Settings\n")
            for key, value in report["settings"].items():
                md.append(f"- **{key}:** {value}")
            md.append("\n## Median Throughput (bits/s) and Latency (ms per timeslot)\n")
            md.append("| Scheduler | AM | GM | HM | Train latency | Test latency |")
            md.append("|---|---|---|---|---|---|")
            for row in ReportGenerator._comparison_rows(report):
                md.append("| " + " | ".join(row) + " |")
            md.append("\n## Ordering Checks\n")
            if report["violations"]:
                for violation in report["violations"]:
                    md.append(f"- {violation}")
            else:
                md.append("No violations of the expected GM ordering.")
            return "\n".join(md) + "\n"

        summary = report["summary"]
        config = report["config"]
        md.append("# Uplink Scheduling Run Report\n")
        md.append(f"**Generated:** {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}\n")
        md.append("## Run Information\n")
        md.append(f"- **Run:** {report['run_id']}")
        md.append(f"- **Scheduler:** {config['scheduler']}")
        md.append(f"- **Technology:** {config['tech']}")
        md.append(f"- **Cells:** {config['cells']} x {config['devices_per_cell']} devices, {config['sc_count']} SCs")
        md.append(f"- **Fading:** {'on' if config['fading'] else 'off'}")
        md.append(f"- **Test realizations:** {summary.get('omega_test', len(report.get('records', [])))}\n")

        md.append("## Throughput (bits/s)\n")
        md.append("| Metric | Q1 | Median | Q3 |")
        md.append("|---|---|---|---|")
        for row in ReportGenerator._metric_rows(summary):
            md.append("| " + " | ".join(row) + " |")

        zero = sum(1 for r in report.get("records", []) if r["zero_rate_count"] > 0)
        if zero:
            md.append(f"\n{zero} realization(s) had at least one zero-rate device (GM = HM = 0).")
        if "compensation_dbm" in summary:
            md.append("\n## ICI Compensation\n")
            for metric, value in summary["compensation_dbm"].items():
                md.append(f"- **{metric.upper()}:** {value:.1f} dBm")
        if "benchmark_spread" in summary:
            spread = summary["benchmark_spread"]
            md.append("\n## Benchmark Multi-start Spread\n")
            md.append(f"- **Median:** {spread['median']:.4f}")
            md.append(f"- **Max:** {spread['max']:.4f} over {spread['solves']} solves")
        if "latency_ms" in summary:
            latency = summary["latency_ms"]
            md.append("\n## Latency (ms per timeslot)\n")
            md.append(f"- **Train:** {_fmt(latency.get('train_ms'), 3)}")
            md.append(f"- **Test:** {_fmt(latency.get('test_ms'), 3)}")
        return "\n".join(md) + "\n"

    @staticmethod
    def generate_html(report: Dict[str, Any]) -> str:
        """Generate HTML format report."""
        body = markdown.markdown(ReportGenerator.generate_markdown(report), extensions=["tables"])
        title = "Scheduler Comparison Report" if _is_comparison(report) else f"Run {report['run_id']}"
        return HTML_TEMPLATE.render(title=title, body=body)

    @staticmethod
    def generate_json(report: Dict[str, Any]) -> str:
        """Generate JSON format report."""
        return json.dumps(report, indent=2)

    @staticmethod
    def generate_pdf(report: Dict[str, Any]) -> bytes:
        """Generate PDF format report."""
        buffer = BytesIO()
        doc = SimpleDocTemplate(buffer, pagesize=letter,
                                rightMargin=72, leftMargin=72,
                                topMargin=72, bottomMargin=18)
        elements = []

        styles = getSampleStyleSheet()
        styles.add(ParagraphStyle(name='CustomTitle',
                                  parent=styles['Heading1'],
                                  fontSize=22,
                                  textColor=colors.white,
                                  spaceAfter=30,
                                  alignment=TA_CENTER))
        styles.add(ParagraphStyle(name='CustomHeading',
                                  parent=styles['Heading2'],
                                  fontSize=14,
                                  textColor=colors.white,
                                  spaceAfter=12,
                                  spaceBefore=6,
                                  leftIndent=10))
        styles.add(ParagraphStyle(name='CustomBody',
                                  parent=styles['BodyText'],
                                  fontSize=10,
                                  spaceAfter=12))

        def banner(text, style, color, padding):
            table = Table([[Paragraph(text, styles[style])]], colWidths=[6.5*inch])
            table.setStyle(TableStyle([
                ('BACKGROUND', (0, 0), (-1, -1), colors.HexColor(color)),
                ('TOPPADDING', (0, 0), (-1, -1), padding),
                ('BOTTOMPADDING', (0, 0), (-1, -1), padding),
            ]))
            elements.append(table)
            elements.append(Spacer(1, 0.15*inch))

        def grid(rows, widths):
            table = Table(rows, colWidths=[w*inch for w in widths])
            table.setStyle(TableStyle([
                ('BACKGROUND', (0, 0), (-1, 0), colors.HexColor('#0a192f')),
                ('TEXTCOLOR', (0, 0), (-1, 0), colors.white),
                ('BACKGROUND', (0, 1), (-1, -1), colors.HexColor('#f0f8ff')),
                ('FONTNAME', (0, 0), (-1, 0), 'Helvetica-Bold'),
                ('FONTSIZE', (0, 0), (-1, -1), 9),
                ('ALIGN', (1, 0), (-1, -1), 'RIGHT'),
                ('GRID', (0, 0), (-1, -1), 0.5, colors.grey),
            ]))
            elements.append(table)
            elements.append(Spacer(1, 0.3*inch))

        if _is_comparison(report):
            banner("Scheduler Comparison Report", 'CustomTitle', '#0a192f', 20)
            banner("Median Throughput and Latency", 'CustomHeading', '#2c5282', 8)
            header = ['Scheduler', 'AM', 'GM', 'HM', 'Train ms', 'Test ms']
            grid([header] + ReportGenerator._comparison_rows(report), [1.5, 1.1, 1.1, 1.1, 0.85, 0.85])
            banner("Ordering Checks", 'CustomHeading', '#2c5282', 8)
            for violation in report["violations"] or ["No violations of the expected GM ordering."]:
                elements.append(Paragraph(escape(violation), styles['CustomBody']))
        else:
            config = report["config"]
            banner(f"Uplink Scheduling Run: {report['run_id']}", 'CustomTitle', '#0a192f', 20)
            banner("Run Information", 'CustomHeading', '#2c5282', 8)
            info = [
                ['Setting', 'Value'],
                ['Scheduler', config['scheduler']],
                ['Technology', config['tech']],
                ['Cells', str(config['cells'])],
                ['Devices per cell', str(config['devices_per_cell'])],
                ['Sub-carriers', str(config['sc_count'])],
                ['Fading', 'on' if config['fading'] else 'off'],
            ]
            grid(info, [2.5, 4.0])
            banner("Throughput (bits/s)", 'CustomHeading', '#2c5282', 8)
            grid([['Metric', 'Q1', 'Median', 'Q3']] + ReportGenerator._metric_rows(report["summary"]),
                 [2.0, 1.5, 1.5, 1.5])

        elements.append(Spacer(1, 0.5*inch))
        elements.append(Paragraph(
            f"<i>Generated {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}</i>", styles['CustomBody']
        ))
        doc.build(elements)

        pdf = buffer.getvalue()
        buffer.close()
        return pdf
