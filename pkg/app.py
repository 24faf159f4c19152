"""
Graph Union Lab - Streamlit dashboard
Pick or paste a model spec, inspect its moments and run a small seeded batch
"""

import json

import pandas as pd
import streamlit as st

# ============================================================================
# PAGE CONFIGURATION (MUST BE FIRST STREAMLIT COMMAND)
# ============================================================================

st.set_page_config(
    page_title="Graph Union Lab",
    page_icon="🕸️",
    layout="wide",
    initial_sidebar_state="expanded"
)

from config import SIMULATION_CONFIG, get_config_summary
from harness import ExperimentConfig, StatisticsRequest, moments_report, run_trials
from model import GraphUnionError, spec_from_dict, spec_to_dict, validate_spec

# Dashboard batches stay small; larger runs belong to `main.py run`
MAX_DASHBOARD_TRIALS = 500

PRESETS = {
    'Random edges (K2), n=200': {
        'n': 200, 'm': 530,
        'kind': {'fixed_graphs': [{'vertices': 2, 'edges': [[1, 2]]}]},
    },
    'Random triangles, n=200': {
        'n': 200, 'm': 420,
        'kind': {'clique_sizes': {'support': [{'size': 3, 'w': 1.0}]}},
    },
    'Bernoulli communities, n=200': {
        'n': 200, 'm': 300,
        'kind': {'bernoulli_yq': {'support': [{'y': 4, 'q': 0.5, 'w': 0.5}, {'y': 6, 'q': 0.3, 'w': 0.5}]}},
    },
}

# ============================================================================
# STREAMLIT UI
# ============================================================================


def init_session_state():
    """Initialize session state variables"""
    if 'spec_text' not in st.session_state:
        st.session_state.spec_text = json.dumps(next(iter(PRESETS.values())), indent=2)
    if 'last_run' not in st.session_state:
        st.session_state.last_run = None


def parse_spec_text(text: str):
    """Spec from the editor text, or (None, error message)"""
    try:
        spec = spec_from_dict(json.loads(text))
    except (json.JSONDecodeError, GraphUnionError) as e:
        return None, str(e)
    report = validate_spec(spec)
    if not report.ok:
        return None, '; '.join(report.messages)
    return spec, ''


def spec_editor():
    st.subheader("Model")
    preset = st.selectbox("Preset", ['(custom)'] + list(PRESETS))
    if preset != '(custom)' and st.button("Load preset"):
        st.session_state.spec_text = json.dumps(PRESETS[preset], indent=2)
    st.session_state.spec_text = st.text_area("ModelSpec JSON", st.session_state.spec_text, height=260)
    return parse_spec_text(st.session_state.spec_text)


def moments_view(spec):
    st.subheader("Moments and thresholds")
    try:
        report = moments_report(spec)
    except GraphUnionError as e:
        st.error(f"Cannot compute moments: {e}")
        return

    col1, col2, col3, col4 = st.columns(4)
    with col1:
        st.metric("kappa", f"{report['kappa']:.4g}")
    with col2:
        st.metric("alpha", f"{report['alpha']:.4g}")
    with col3:
        st.metric("a", report['a'] if report['a'] is not None else '-')
    with col4:
        if 'lambda' in report:
            st.metric("P{connected} prediction", f"{report['predicted_connect']:.4f}")

    if 'lambda' in report:
        st.dataframe(pd.DataFrame(
            [{'k': int(k), 'lambda(k)': v} for k, v in report['lambda'].items()]
        ), hide_index=True)
    st.dataframe(pd.DataFrame(
        [{'t': int(t), 'kappa(t)': v} for t, v in report['kappa_t'].items()]
    ), hide_index=True)


def batch_view(spec):
    st.subheader("Seeded batch")
    col1, col2, col3 = st.columns(3)
    with col1:
        trials = st.number_input("Trials", min_value=1, max_value=MAX_DASHBOARD_TRIALS, value=50)
    with col2:
        seed = st.number_input("Master seed", min_value=0, value=SIMULATION_CONFIG['default_master_seed'])
    with col3:
        kconn = st.multiselect("k-connectivity", [2, 3, 4], default=[2])

    if st.button("Run batch"):
        config = ExperimentConfig(
            spec=spec, trials=int(trials), master_seed=int(seed),
            statistics=StatisticsRequest(kconn=tuple(kconn), eta_census=True),
        )
        with st.spinner("Sampling..."):
            try:
                st.session_state.last_run = run_trials(config, workers=1)
            except GraphUnionError as e:
                st.error(f"Run failed: {e}")
                return

    result = st.session_state.last_run
    if result is not None:
        st.caption(f"n={result.config.spec.n}, m={result.config.spec.m}, {result.config.trials} trials")
        st.dataframe(result.to_frame(), hide_index=True)
        with st.expander("Spec of this run"):
            st.json(spec_to_dict(result.config.spec))


# ============================================================================
# MAIN APPLICATION
# ============================================================================


def main():
    """Main application entry point"""
    init_session_state()

    with st.sidebar:
        st.title("🕸️ Graph Union Lab")
        st.caption("Unions of random subgraphs of K_n")
        st.write("---")
        st.json(get_config_summary())

    spec, error = spec_editor()
    if spec is None:
        st.error(f"Invalid spec: {error}")
        return

    moments_view(spec)
    st.write("---")
    batch_view(spec)


if __name__ == "__main__":
    main()
