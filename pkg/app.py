"""
Flask API for the Uplink Scheduling Simulator
Runs experiments and comparisons synchronously and serves their reports.
"""
import logging
import os
from io import BytesIO

from dotenv import load_dotenv
from flask import Flask, jsonify, request, send_file
from flask_cors import CORS

from src.config import load_config, parse_override
from src.errors import ConfigurationError
from src.harness import ExperimentRunner, compare_schedulers
from src.reports.generator import ReportGenerator

load_dotenv()

app = Flask(__name__)
CORS(app)
logger = logging.getLogger(__name__)

# Store run reports in memory (keyed by run id)
run_results = {}


def _config_from(data):
    """Resolve a RunConfig from a request body: preset, 'config' mapping and 'set' overrides."""
    overrides = [(key, value) for key, value in (data.get('config') or {}).items()]
    overrides += [parse_override(text) for text in data.get('set', [])]
    return load_config(preset=data.get('preset', 'default'), overrides=_flatten(overrides))


def _flatten(pairs, prefix=''):
    flat = []
    for key, value in pairs:
        path = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.extend(_flatten(value.items(), prefix=f"{path}."))
        else:
            flat.append((path, value))
    return flat


def _error(e):
    if isinstance(e, ConfigurationError):
        return jsonify({'error': str(e), 'problems': e.problems}), 400
    logger.exception("Request failed")
    return jsonify({'error': str(e)}), 500


@app.route('/experiments', methods=['POST'])
def run_experiment():
    """Run one experiment and keep its report."""
    try:
        data = request.get_json(silent=True) or {}
        config = _config_from(data)
        result = ExperimentRunner(config).run_experiment(write=bool(data.get('write', False)))
        report = result.to_report()
        run_results[result.run_id] = report
        return jsonify({
            'success': True,
            'run_id': result.run_id,
            'summary': result.summary,
        })
    except Exception as e:
        return _error(e)


@app.route('/compare', methods=['POST'])
def run_comparison():
    """Run the listed schedulers on the same network and compare them."""
    try:
        data = request.get_json(silent=True) or {}
        schedulers = data.get('schedulers') or []
        if len(schedulers) < 2:
            return jsonify({'error': 'At least two schedulers are required'}), 400
        base = _config_from(data)
        configs = [base.with_overrides([('scheduler', name)]).validate() for name in schedulers]
        comparison = compare_schedulers(configs).to_dict()
        comparison_id = f"compare-{base.tech}-seed{base.seed}"
        run_results[comparison_id] = comparison
        return jsonify({'success': True, 'comparison_id': comparison_id, 'comparison': comparison})
    except Exception as e:
        return _error(e)


@app.route('/api/results/<run_id>')
def get_results_json(run_id):
    """Get a run or comparison report as JSON."""
    report = run_results.get(run_id)

    if not report:
        return jsonify({'error': 'Run not found'}), 404

    return jsonify(report)


@app.route('/api/results/<run_id>/pdf')
def get_results_pdf(run_id):
    """Get a run or comparison report as PDF."""
    report = run_results.get(run_id)

    if not report:
        return jsonify({'error': 'Run not found'}), 404

    try:
        pdf_buffer = BytesIO(ReportGenerator.generate_pdf(report))
        pdf_buffer.seek(0)
        return send_file(
            pdf_buffer,
            mimetype='application/pdf',
            as_attachment=True,
            download_name=f'{run_id}.pdf'
        )
    except Exception as e:
        return jsonify({'error': str(e)}), 500


@app.route('/health')
def health():
    """Health check endpoint."""
    return jsonify({'status': 'healthy'})


if __name__ == '__main__':
    logging.basicConfig(level=os.getenv('UPLINK_LOG_LEVEL', 'INFO').upper())
    port = int(os.getenv('FLASK_PORT', 5001))
    app.run(debug=os.getenv('FLASK_DEBUG', '0') == '1', host='0.0.0.0', port=port)
