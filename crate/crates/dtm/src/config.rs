//! Scenario configuration: a flat, line-oriented `key=value` format with
//! dotted section keys, validated on load. Missing keys take defaults that
//! reproduce the reference scenario; unknown keys are errors.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::agents::{BackendErrorPolicy, RiskPreference, Role, ValueSensitivity};
use crate::currency::Currency;
use crate::error::ConfigError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub rows: usize,
    pub cols: usize,
    pub link_length_m: f64,
    pub lanes: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandConfig {
    pub flow_vph: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccidentConfig {
    pub link: u32,
    pub start_s: u32,
    pub end_s: u32,
    /// 0 disables the accident entirely; (0, 1] scales the capacity loss.
    pub severity: f64,
    pub position_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalConfig {
    pub cycle_s: u32,
    pub green_ns_s: u32,
    pub green_ew_s: u32,
    pub adjustment_delta_s: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentConfig {
    pub role: Role,
    pub risk: RiskPreference,
    pub sensitivity: ValueSensitivity,
    pub endowment: Currency,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketConfig {
    pub proposal_fee: Currency,
    pub observe_period_s: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PricingConfig {
    pub w: f64,
    pub conversion_rate: f64,
    pub aggressive_multiplier: f64,
    pub ask_markup_aggressive: f64,
    pub ask_markup_conservative: f64,
    pub concession_step: Currency,
    pub max_rounds: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendMode {
    Rule,
    Llm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendConfig {
    pub mode: BackendMode,
    pub base_url: Option<String>,
    pub model: String,
    pub timeout_s: u64,
    pub retries: u32,
    pub on_error: BackendErrorPolicy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub horizon_s: u32,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub network: NetworkConfig,
    pub demand: DemandConfig,
    pub accident: AccidentConfig,
    pub signal: SignalConfig,
    pub agents: Vec<AgentConfig>,
    pub market: MarketConfig,
    pub pricing: PricingConfig,
    pub backend: BackendConfig,
    pub run: RunConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            network: NetworkConfig {
                rows: 1,
                cols: 1,
                link_length_m: 500.0,
                lanes: 3,
            },
            demand: DemandConfig {
                flow_vph: 220.0,
                seed: 7,
            },
            accident: AccidentConfig {
                link: 0,
                start_s: 200,
                end_s: 700,
                severity: 0.5,
                position_m: 250.0,
            },
            signal: SignalConfig {
                cycle_s: 60,
                green_ns_s: 30,
                green_ew_s: 30,
                adjustment_delta_s: 3,
            },
            agents: vec![
                AgentConfig {
                    role: Role::Controller,
                    risk: RiskPreference::Conservative,
                    sensitivity: ValueSensitivity::High,
                    endowment: Currency::from_major(100.0),
                },
                AgentConfig {
                    role: Role::Vehicle,
                    risk: RiskPreference::Conservative,
                    sensitivity: ValueSensitivity::High,
                    endowment: Currency::from_major(30.0),
                },
            ],
            market: MarketConfig {
                proposal_fee: Currency::from_major(1.0),
                observe_period_s: 5,
            },
            pricing: PricingConfig {
                w: 0.5,
                conversion_rate: 1.0,
                aggressive_multiplier: 1.3,
                ask_markup_aggressive: 1.5,
                ask_markup_conservative: 1.1,
                concession_step: Currency::from_major(1.0),
                max_rounds: 5,
            },
            backend: BackendConfig {
                mode: BackendMode::Rule,
                base_url: None,
                model: crate::llm::DEFAULT_MODEL.to_string(),
                timeout_s: crate::llm::DEFAULT_TIMEOUT_S,
                retries: crate::llm::DEFAULT_RETRIES,
                on_error: BackendErrorPolicy::RejectAndLog,
            },
            run: RunConfig {
                horizon_s: 1000,
                seed: 7,
            },
        }
    }
}

impl ScenarioConfig {
    /// Parses a config file. An empty file yields the defaults.
    pub fn load(path: &Path) -> Result<ScenarioConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(e.to_string()))?;
        let (config, leftover) = Self::from_str_with_extras(&text)?;
        if let Some((line, key)) = leftover.into_iter().next() {
            return Err(ConfigError::Parse {
                line,
                message: format!("unknown key {key:?}"),
            });
        }
        Ok(config)
    }

    pub fn from_text(text: &str) -> Result<ScenarioConfig, ConfigError> {
        let (config, leftover) = Self::from_str_with_extras(text)?;
        if let Some((line, key)) = leftover.into_iter().next() {
            return Err(ConfigError::Parse {
                line,
                message: format!("unknown key {key:?}"),
            });
        }
        Ok(config)
    }

    /// Parses the known keys and hands back whatever it did not consume
    /// (used by fixture files that mix scenario keys with their own).
    pub fn from_str_with_extras(
        text: &str,
    ) -> Result<(ScenarioConfig, Vec<(usize, String)>), ConfigError> {
        let mut entries: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(ConfigError::Parse {
                line: line_no,
                message: "expected key=value".to_string(),
            })?;
            let key = key.trim().to_string();
            if entries.contains_key(&key) {
                return Err(ConfigError::Parse {
                    line: line_no,
                    message: format!("duplicate key {key:?}"),
                });
            }
            entries.insert(key, (line_no, value.trim().to_string()));
        }

        let mut config = ScenarioConfig::default();
        let mut agent_entries: BTreeMap<usize, Vec<(String, usize, String)>> = BTreeMap::new();
        let mut leftover = Vec::new();

        for (key, (line, value)) in entries {
            if let Some(rest) = key.strip_prefix("agents.") {
                let (index, field) = rest.split_once('.').ok_or(ConfigError::Parse {
                    line,
                    message: format!("agent key must be agents.<n>.<field>, got {key:?}"),
                })?;
                let index: usize = index.parse().map_err(|_| ConfigError::Parse {
                    line,
                    message: format!("bad agent index in {key:?}"),
                })?;
                agent_entries
                    .entry(index)
                    .or_default()
                    .push((field.to_string(), line, value));
                continue;
            }
            if !apply_key(&mut config, &key, &value, line)? {
                leftover.push((line, key));
            }
        }

        if !agent_entries.is_empty() {
            let mut agents = Vec::new();
            for (expected, (index, fields)) in agent_entries.into_iter().enumerate() {
                if index != expected {
                    return Err(ConfigError::Range(format!(
                        "agents.{index} (indices must be contiguous from 0)"
                    )));
                }
                let mut agent = AgentConfig {
                    role: Role::Vehicle,
                    risk: RiskPreference::Conservative,
                    sensitivity: ValueSensitivity::High,
                    endowment: Currency::from_major(30.0),
                };
                for (field, line, value) in fields {
                    match field.as_str() {
                        "role" => {
                            agent.role = match value.as_str() {
                                "vehicle" => Role::Vehicle,
                                "controller" => Role::Controller,
                                _ => return Err(ConfigError::Range(format!("agents.{index}.role"))),
                            }
                        }
                        "risk" => agent.risk = parse_risk(&value, &format!("agents.{index}.risk"))?,
                        "sensitivity" => {
                            agent.sensitivity =
                                parse_sensitivity(&value, &format!("agents.{index}.sensitivity"))?
                        }
                        "endowment" => {
                            agent.endowment = Currency::from_major(parse_number(
                                &value,
                                line,
                                &format!("agents.{index}.endowment"),
                            )?)
                        }
                        _ => {
                            return Err(ConfigError::Parse {
                                line,
                                message: format!("unknown key \"agents.{index}.{field}\""),
                            })
                        }
                    }
                }
                agents.push(agent);
            }
            config.agents = agents;
        }

        config.validate()?;
        Ok((config, leftover))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let range = |ok: bool, key: &str| {
            if ok {
                Ok(())
            } else {
                Err(ConfigError::Range(key.to_string()))
            }
        };
        range(self.network.rows >= 1, "network.rows")?;
        range(self.network.cols >= 1, "network.cols")?;
        range(self.network.link_length_m > 0.0, "network.link_length_m")?;
        range(self.network.lanes >= 1, "network.lanes")?;
        range(self.demand.flow_vph >= 0.0, "demand.flow_vph")?;
        range(
            (0.0..=1.0).contains(&self.accident.severity),
            "accident.severity",
        )?;
        range(self.accident.start_s < self.accident.end_s, "accident.start_s")?;
        range(
            self.accident.position_m >= 0.0
                && self.accident.position_m <= self.network.link_length_m,
            "accident.position_m",
        )?;
        range(self.signal.green_ns_s >= 1, "signal.green_ns_s")?;
        range(self.signal.green_ew_s >= 1, "signal.green_ew_s")?;
        range(
            self.signal.green_ns_s + self.signal.green_ew_s == self.signal.cycle_s,
            "signal.cycle_s",
        )?;
        range(
            self.signal.adjustment_delta_s
                < self.signal.green_ns_s.min(self.signal.green_ew_s),
            "signal.adjustment_delta_s",
        )?;
        range(!self.market.proposal_fee.is_negative(), "market.proposal_fee")?;
        range(self.market.observe_period_s >= 1, "market.observe_period_s")?;
        range((0.0..=1.0).contains(&self.pricing.w), "pricing.w")?;
        range(self.pricing.conversion_rate > 0.0, "pricing.conversion_rate")?;
        range(self.pricing.aggressive_multiplier > 0.0, "pricing.aggressive_multiplier")?;
        range(self.pricing.ask_markup_aggressive > 0.0, "pricing.ask_markup_aggressive")?;
        range(self.pricing.ask_markup_conservative > 0.0, "pricing.ask_markup_conservative")?;
        range(self.pricing.concession_step > Currency::ZERO, "pricing.concession_step")?;
        range(self.pricing.max_rounds >= 1, "pricing.max_rounds")?;
        range(self.run.horizon_s >= 1, "run.horizon_s")?;
        let controllers = self
            .agents
            .iter()
            .filter(|a| a.role == Role::Controller)
            .count();
        range(controllers == 1, "agents (exactly one controller)")?;
        let vehicles = self.agents.iter().filter(|a| a.role == Role::Vehicle).count();
        range(vehicles <= 1, "agents (at most one vehicle template)")?;
        for agent in &self.agents {
            range(!agent.endowment.is_negative(), "agents.endowment")?;
        }
        Ok(())
    }

    pub fn controller(&self) -> &AgentConfig {
        self.agents
            .iter()
            .find(|a| a.role == Role::Controller)
            .expect("validated: one controller")
    }

    /// The profile template stamped onto every spawned vehicle.
    pub fn vehicle_template(&self) -> AgentConfig {
        self.agents
            .iter()
            .find(|a| a.role == Role::Vehicle)
            .cloned()
            .unwrap_or(AgentConfig {
                role: Role::Vehicle,
                risk: RiskPreference::Conservative,
                sensitivity: ValueSensitivity::High,
                endowment: Currency::from_major(30.0),
            })
    }

    /// Key=value echo of the effective configuration, in a stable order.
    pub fn echo(&self) -> Vec<(String, String)> {
        let mut out = vec![
            ("network.rows".into(), self.network.rows.to_string()),
            ("network.cols".into(), self.network.cols.to_string()),
            ("network.link_length_m".into(), format!("{}", self.network.link_length_m)),
            ("network.lanes".into(), self.network.lanes.to_string()),
            ("demand.flow_vph".into(), format!("{}", self.demand.flow_vph)),
            ("demand.seed".into(), self.demand.seed.to_string()),
            ("accident.link".into(), self.accident.link.to_string()),
            ("accident.start_s".into(), self.accident.start_s.to_string()),
            ("accident.end_s".into(), self.accident.end_s.to_string()),
            ("accident.severity".into(), format!("{}", self.accident.severity)),
            ("accident.position_m".into(), format!("{}", self.accident.position_m)),
            ("signal.cycle_s".into(), self.signal.cycle_s.to_string()),
            ("signal.green_ns_s".into(), self.signal.green_ns_s.to_string()),
            ("signal.green_ew_s".into(), self.signal.green_ew_s.to_string()),
            ("signal.adjustment_delta_s".into(), self.signal.adjustment_delta_s.to_string()),
            ("market.proposal_fee".into(), self.market.proposal_fee.to_string()),
            ("market.observe_period_s".into(), self.market.observe_period_s.to_string()),
            ("pricing.w".into(), format!("{}", self.pricing.w)),
            ("pricing.conversion_rate".into(), format!("{}", self.pricing.conversion_rate)),
            ("pricing.aggressive_multiplier".into(), format!("{}", self.pricing.aggressive_multiplier)),
            ("pricing.ask_markup_aggressive".into(), format!("{}", self.pricing.ask_markup_aggressive)),
            ("pricing.ask_markup_conservative".into(), format!("{}", self.pricing.ask_markup_conservative)),
            ("pricing.concession_step".into(), self.pricing.concession_step.to_string()),
            ("pricing.max_rounds".into(), self.pricing.max_rounds.to_string()),
            ("backend.mode".into(), match self.backend.mode {
                BackendMode::Rule => "rule".into(),
                BackendMode::Llm => "llm".into(),
            }),
            ("backend.model".into(), self.backend.model.clone()),
            ("backend.timeout_s".into(), self.backend.timeout_s.to_string()),
            ("backend.retries".into(), self.backend.retries.to_string()),
            ("backend.on_error".into(), match self.backend.on_error {
                BackendErrorPolicy::RejectAndLog => "reject".into(),
                BackendErrorPolicy::RetryThenReject => "retry_reject".into(),
            }),
            ("run.horizon_s".into(), self.run.horizon_s.to_string()),
            ("run.seed".into(), self.run.seed.to_string()),
        ];
        if let Some(url) = &self.backend.base_url {
            out.push(("backend.base_url".into(), url.clone()));
        }
        for (i, agent) in self.agents.iter().enumerate() {
            out.push((format!("agents.{i}.role"), match agent.role {
                Role::Controller => "controller".into(),
                Role::Vehicle => "vehicle".into(),
            }));
            out.push((format!("agents.{i}.risk"), agent.risk.as_str().into()));
            out.push((format!("agents.{i}.sensitivity"), agent.sensitivity.as_str().into()));
            out.push((format!("agents.{i}.endowment"), agent.endowment.to_string()));
        }
        out
    }
}

fn parse_number(value: &str, line: usize, key: &str) -> Result<f64, ConfigError> {
    value.parse::<f64>().map_err(|_| ConfigError::Parse {
        line,
        message: format!("{key} expects a number, got {value:?}"),
    })
}

fn parse_int(value: &str, line: usize, key: &str) -> Result<u64, ConfigError> {
    value.parse::<u64>().map_err(|_| ConfigError::Parse {
        line,
        message: format!("{key} expects an integer, got {value:?}"),
    })
}

fn parse_risk(value: &str, key: &str) -> Result<RiskPreference, ConfigError> {
    match value {
        "aggressive" => Ok(RiskPreference::Aggressive),
        "conservative" => Ok(RiskPreference::Conservative),
        _ => Err(ConfigError::Range(key.to_string())),
    }
}

fn parse_sensitivity(value: &str, key: &str) -> Result<ValueSensitivity, ConfigError> {
    match value {
        "high" => Ok(ValueSensitivity::High),
        "low" => Ok(ValueSensitivity::Low),
        _ => Err(ConfigError::Range(key.to_string())),
    }
}

/// Applies one dotted key; returns false when the key is not a scenario key.
fn apply_key(
    config: &mut ScenarioConfig,
    key: &str,
    value: &str,
    line: usize,
) -> Result<bool, ConfigError> {
    match key {
        "network.rows" => config.network.rows = parse_int(value, line, key)? as usize,
        "network.cols" => config.network.cols = parse_int(value, line, key)? as usize,
        "network.link_length_m" => config.network.link_length_m = parse_number(value, line, key)?,
        "network.lanes" => config.network.lanes = parse_int(value, line, key)? as u32,
        "demand.flow_vph" => config.demand.flow_vph = parse_number(value, line, key)?,
        "demand.seed" => config.demand.seed = parse_int(value, line, key)?,
        "accident.link" => config.accident.link = parse_int(value, line, key)? as u32,
        "accident.start_s" => config.accident.start_s = parse_int(value, line, key)? as u32,
        "accident.end_s" => config.accident.end_s = parse_int(value, line, key)? as u32,
        "accident.severity" => config.accident.severity = parse_number(value, line, key)?,
        "accident.position_m" => config.accident.position_m = parse_number(value, line, key)?,
        "signal.cycle_s" => config.signal.cycle_s = parse_int(value, line, key)? as u32,
        "signal.green_ns_s" => config.signal.green_ns_s = parse_int(value, line, key)? as u32,
        "signal.green_ew_s" => config.signal.green_ew_s = parse_int(value, line, key)? as u32,
        "signal.adjustment_delta_s" => {
            config.signal.adjustment_delta_s = parse_int(value, line, key)? as u32
        }
        "market.proposal_fee" => {
            config.market.proposal_fee = Currency::from_major(parse_number(value, line, key)?)
        }
        "market.observe_period_s" => {
            config.market.observe_period_s = parse_int(value, line, key)? as u32
        }
        "pricing.w" => config.pricing.w = parse_number(value, line, key)?,
        "pricing.conversion_rate" => config.pricing.conversion_rate = parse_number(value, line, key)?,
        "pricing.aggressive_multiplier" => {
            config.pricing.aggressive_multiplier = parse_number(value, line, key)?
        }
        "pricing.ask_markup_aggressive" => {
            config.pricing.ask_markup_aggressive = parse_number(value, line, key)?
        }
        "pricing.ask_markup_conservative" => {
            config.pricing.ask_markup_conservative = parse_number(value, line, key)?
        }
        "pricing.concession_step" => {
            config.pricing.concession_step = Currency::from_major(parse_number(value, line, key)?)
        }
        "pricing.max_rounds" => config.pricing.max_rounds = parse_int(value, line, key)? as u32,
        "backend.mode" => {
            config.backend.mode = match value {
                "rule" => BackendMode::Rule,
                "llm" => BackendMode::Llm,
                _ => return Err(ConfigError::Range("backend.mode".to_string())),
            }
        }
        "backend.base_url" => config.backend.base_url = Some(value.to_string()),
        "backend.model" => config.backend.model = value.to_string(),
        "backend.timeout_s" => config.backend.timeout_s = parse_int(value, line, key)?,
        "backend.retries" => config.backend.retries = parse_int(value, line, key)? as u32,
        "backend.on_error" => {
            config.backend.on_error = match value {
                "reject" => BackendErrorPolicy::RejectAndLog,
                "retry_reject" => BackendErrorPolicy::RetryThenReject,
                _ => return Err(ConfigError::Range("backend.on_error".to_string())),
            }
        }
        "run.horizon_s" => config.run.horizon_s = parse_int(value, line, key)? as u32,
        "run.seed" => config.run.seed = parse_int(value, line, key)?,
        _ => return Ok(false),
    }
    Ok(true)
}
