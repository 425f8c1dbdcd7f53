import android.accessibilityservice.AccessibilityService;
import android.util.Log;
import android.view.accessibility.AccessibilityEvent;

@ValueAnnotation(positive = {"Benevolence", "Universalism"}, negative = {"Self Direction", "Security"})
public class NotificationService extends AccessibilityService {
    private static final String TAG = "NotificationService";

    @Override
    public void onAccessibilityEvent(AccessibilityEvent event) {
        if (event.getEventType() == AccessibilityEvent.TYPE_NOTIFICATION_STATE_CHANGED) {
            Log.d(TAG, "notification from " + event.getPackageName());
        }
    }

    @Override
    public void onInterrupt() {
    }
}
