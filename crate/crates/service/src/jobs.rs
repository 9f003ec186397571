use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use tokio::sync::Semaphore;

use crate::app::{App, BatchReport, PreparedBatch};
use crate::error::ApiError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobStatus {
    Queued,
    Running,
    Done,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Job {
    pub job_id: String,
    pub status: JobStatus,
    pub total: usize,
    pub completed: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<BatchReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ApiError>,
}

/// In-process batch queue. At most `concurrency` batches generate at once;
/// the rest wait as `queued`. Finished jobs never change again.
#[derive(Clone)]
pub struct JobQueue {
    jobs: Arc<Mutex<HashMap<String, Job>>>,
    permits: Arc<Semaphore>,
}

impl JobQueue {
    pub fn new(concurrency: usize) -> Self {
        JobQueue { jobs: Arc::default(), permits: Arc::new(Semaphore::new(concurrency.max(1))) }
    }

    pub fn get(&self, id: &str) -> Option<Job> {
        self.jobs.lock().expect("job table poisoned").get(id).cloned()
    }

    fn update(&self, id: &str, f: impl FnOnce(&mut Job)) {
        if let Some(job) = self.jobs.lock().expect("job table poisoned").get_mut(id) {
            if !matches!(job.status, JobStatus::Done | JobStatus::Failed) {
                f(job);
            }
        }
    }

    /// Queues a prepared batch and returns its job id immediately.
    pub fn submit(&self, app: Arc<App>, batch: PreparedBatch) -> String {
        let job_id = uuid::Uuid::new_v4().to_string();
        let job = Job {
            job_id: job_id.clone(),
            status: JobStatus::Queued,
            total: batch.total,
            completed: 0,
            result: None,
            error: None,
        };
        self.jobs.lock().expect("job table poisoned").insert(job_id.clone(), job);
        let queue = self.clone();
        let id = job_id.clone();
        tokio::spawn(async move {
            let _permit = queue.permits.clone().acquire_owned().await.expect("semaphore closed");
            queue.update(&id, |j| j.status = JobStatus::Running);
            let worker = app.clone();
            let outcome = tokio::task::spawn_blocking(move || worker.run_batch(batch))
                .await
                .unwrap_or_else(|e| Err(ApiError::new("internal", format!("batch worker panicked: {e}"))));
            queue.update(&id, |j| match outcome {
                Ok(report) => {
                    j.completed = report.items.len();
                    j.status = JobStatus::Done;
                    j.result = Some(report);
                }
                Err(e) => {
                    j.status = JobStatus::Failed;
                    j.error = Some(app.scrub(e));
                }
            });
        });
        job_id
    }
}
