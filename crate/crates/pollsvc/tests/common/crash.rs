use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use peakpoll::model::{AnswerRequest, Choice, CreatePoll, PollMode, SessionView};
use peakpoll::service::State;
use peakpoll::store::EVENTS_FILE;
use peakpoll::{PollService, ServiceConfig, SystemClock};
use peakpoll_core::elicit::{elicit, robust_elicit, ElicitationContext};
use peakpoll_core::oracle::make_true_ranking_oracle;
use peakpoll_core::text::Alternatives;
use peakpoll_core::Ranking;
use peakpoll_simlab::generate::{random_axis, random_sp_ranking};
use peakpoll_simlab::SplitMix64;

pub fn open(dir: &Path, snapshot_every: usize, sync: bool) -> PollService {
    let config = ServiceConfig {
        data_dir: Some(dir.to_path_buf()),
        snapshot_every,
        sync,
        ..ServiceConfig::default()
    };
    PollService::open(config, Arc::new(SystemClock)).unwrap()
}

pub fn answer_one(service: &PollService, id: &str, names: &Alternatives, truth: &Ranking, view: &SessionView) -> SessionView {
    let q = view.query.as_ref().unwrap();
    let prefer = if truth.prefers(names.id(&q.left).unwrap(), names.id(&q.right).unwrap()) {
        Choice::Left
    } else {
        Choice::Right
    };
    service.answer(id, AnswerRequest { prefer, asked: None }).unwrap()
}

pub fn torn_tail(dir: &Path) {
    let mut f = OpenOptions::new().append(true).open(dir.join(EVENTS_FILE)).unwrap();
    f.write_all(br#"{"seq":999999,"ts":"2026-05-01T0"#).unwrap();
}

struct Respondent {
    poll: usize,
    session: String,
    truth: Ranking,
    view: SessionView,
}

/// One crash trial: some sessions part-way, a restart, then completion.
pub fn trial(t: u64) {
    let mut rng = SplitMix64::derive(0xC0FFEE, &[t]);
    let dir = tempfile::tempdir().unwrap();
    let service = open(dir.path(), 1 + (t as usize % 9), t.is_multiple_of(2));
    let m = 4 + rng.below_usize(5);
    let names = Alternatives::letters(m);
    let axis = random_axis(m, &mut rng);
    let axis_names: Vec<String> = axis.order().iter().map(|&a| names.name(a).to_string()).collect();
    let polls = [
        service
            .create_poll(CreatePoll {
                name: "ordinal".into(),
                alternatives: names.names().to_vec(),
                mode: PollMode::OrdinalKnown,
                axis: Some(axis_names),
                positions: None,
                robust: t.is_multiple_of(3),
            })
            .unwrap(),
        service
            .create_poll(CreatePoll {
                name: "unknown".into(),
                alternatives: names.names().to_vec(),
                mode: PollMode::UnknownPositions,
                axis: None,
                positions: None,
                robust: t.is_multiple_of(4),
            })
            .unwrap(),
    ];
    let mut people = Vec::new();
    for k in 0..5 {
        let poll = k % 2;
        let truth = random_sp_ranking(&axis, &mut rng);
        let mut view = service.open_session(&polls[poll]).unwrap();
        let session = view.session_id.take().unwrap();
        let steps = rng.below_usize(2 * m);
        for _ in 0..steps {
            if view.done {
                break;
            }
            view = answer_one(&service, &session, &names, &truth, &view);
        }
        people.push(Respondent {
            poll,
            session,
            truth,
            view,
        });
    }
    let before = serde_json::to_string(&service.state()).unwrap();
    drop(service);
    if t % 3 == 1 {
        torn_tail(dir.path());
    }

    let service = open(dir.path(), 4, true);
    let after: State = service.state();
    assert_eq!(serde_json::to_string(&after).unwrap(), before, "trial {t}");
    for p in &mut people {
        let resumed = service.next(&p.session).unwrap();
        assert_eq!(resumed, p.view, "trial {t}");
        while !p.view.done {
            p.view = answer_one(&service, &p.session, &names, &p.truth, &p.view);
        }
        assert_eq!(p.view.result.as_ref().unwrap().ranking, names.ranking_names(&p.truth));
    }
    // the ordinal sessions match the library exactly
    let poll = service.poll(&polls[0]).unwrap();
    for p in people.iter().filter(|p| p.poll == 0) {
        let context = ElicitationContext::KnownAxis(axis.clone());
        let mut oracle = make_true_ranking_oracle(p.truth.clone());
        let report = if poll.record.robust {
            robust_elicit(&mut oracle, &context)
        } else {
            elicit(&mut oracle, &context)
        }
        .unwrap();
        assert_eq!(p.view.result.as_ref().unwrap().queries_used, report.queries_used);
    }
}

